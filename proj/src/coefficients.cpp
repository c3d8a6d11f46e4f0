#include "snls/coefficients.hpp"

#include <cmath>
#include <stdexcept>

#include "snls/rng.hpp"

namespace snls {

NonlinearitySpec NonlinearitySpec::make(double lambda, double sigma, int dim) {
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("nonlinearity dimension must be 1 or 2");
  if (!std::isfinite(lambda))
    throw std::invalid_argument("nonlinearity strength must be finite");
  if (!(sigma > 0.0) || !(sigma < 2.0 / dim))
    throw std::invalid_argument("nonlinearity exponent must lie in (0, 2/dim)");
  return {lambda, sigma, dim};
}

ComplexField f_eval(const NonlinearitySpec& spec, const ComplexField& u) {
  if (u.rep() != Rep::Physical)
    throw std::invalid_argument("nonlinearity acts in physical representation");
  ComplexField out = u;
  for (auto& v : out.values()) v *= spec.lambda * std::pow(std::norm(v), spec.sigma);
  return out;
}

Profile profile_from_name(const std::string& name) {
  if (name == "saturating") return Profile::Saturating;
  if (name == "sqrt") return Profile::SqrtSaturating;
  if (name == "rational") return Profile::Rational;
  if (name == "log") return Profile::LogSaturating;
  if (name == "custom") return Profile::Custom;
  throw std::invalid_argument("unknown channel profile: " + name);
}

std::string profile_name(Profile p) {
  switch (p) {
    case Profile::Saturating: return "saturating";
    case Profile::SqrtSaturating: return "sqrt";
    case Profile::Rational: return "rational";
    case Profile::LogSaturating: return "log";
    case Profile::Custom: return "custom";
  }
  return "unknown";
}

namespace {

double builtin_value(const ChannelSpec& c, double theta) {
  const double s = 1.0 + c.rho * theta;
  switch (c.profile) {
    case Profile::Saturating:
      return theta / s;
    case Profile::SqrtSaturating:
      return 1.0 - 1.0 / std::sqrt(s);
    case Profile::Rational:
      return theta * (2.0 + c.rho * theta) / (s * s);
    case Profile::LogSaturating: {
      const double l = std::log(s);
      return l / (1.0 + l);
    }
    default:
      throw std::logic_error("builtin_value on custom profile");
  }
}

double builtin_deriv(const ChannelSpec& c, double theta) {
  const double s = 1.0 + c.rho * theta;
  switch (c.profile) {
    case Profile::Saturating:
      return 1.0 / (s * s);
    case Profile::SqrtSaturating:
      return 0.5 * c.rho / (s * std::sqrt(s));
    case Profile::Rational:
      return 2.0 / (s * s * s);
    case Profile::LogSaturating: {
      const double l = std::log(s);
      const double lp = c.rho / s;
      return lp / ((1.0 + l) * (1.0 + l));
    }
    default:
      throw std::logic_error("builtin_deriv on custom profile");
  }
}

double builtin_second(const ChannelSpec& c, double theta) {
  const double s = 1.0 + c.rho * theta;
  switch (c.profile) {
    case Profile::Saturating:
      return -2.0 * c.rho / (s * s * s);
    case Profile::SqrtSaturating:
      return -0.75 * c.rho * c.rho / (s * s * std::sqrt(s));
    case Profile::Rational:
      return -6.0 * c.rho / (s * s * s * s);
    case Profile::LogSaturating: {
      const double l = std::log(s);
      const double lp = c.rho / s;
      const double lpp = -c.rho * c.rho / (s * s);
      const double d = 1.0 + l;
      return (lpp * d - 2.0 * lp * lp) / (d * d * d);
    }
    default:
      throw std::logic_error("builtin_second on custom profile");
  }
}

double central_diff(const std::function<double(double)>& f, double theta) {
  const double h = std::max(1e-6, 1e-6 * theta);
  const double lo = std::max(0.0, theta - h);
  return (f(theta + h) - f(lo)) / (theta + h - lo);
}

}  // namespace

SaturableFamily::SaturableFamily(std::vector<ChannelSpec> channels)
    : specs_(std::move(channels)) {
  if (specs_.empty())
    throw std::invalid_argument("noise family needs at least one channel");
  for (const auto& c : specs_) {
    if (c.profile == Profile::Custom) {
      if (!c.custom_value)
        throw std::invalid_argument("custom channel needs a value function");
    } else if (!(c.rho > 0.0) || !std::isfinite(c.rho)) {
      throw std::invalid_argument("channel scale must be positive and finite");
    }
  }
}

SaturableFamily SaturableFamily::uniform(int m, Profile profile, double rho) {
  if (m < 1) throw std::invalid_argument("channel count must be positive");
  std::vector<ChannelSpec> specs(m);
  for (auto& c : specs) {
    c.profile = profile;
    c.rho = rho;
  }
  return SaturableFamily(std::move(specs));
}

const ChannelSpec& SaturableFamily::spec(int j) const {
  if (j < 0 || j >= channels())
    throw std::out_of_range("channel index out of range");
  return specs_[j];
}

double SaturableFamily::gtilde(int j, double theta) const {
  const auto& c = spec(j);
  if (!(theta >= 0.0))
    throw std::invalid_argument("squared modulus argument must be nonnegative");
  if (c.profile == Profile::Custom) return c.custom_value(theta);
  return builtin_value(c, theta);
}

double SaturableFamily::gtilde_deriv(int j, double theta) const {
  const auto& c = spec(j);
  if (!(theta >= 0.0))
    throw std::invalid_argument("squared modulus argument must be nonnegative");
  if (c.profile == Profile::Custom) {
    if (c.custom_deriv) return c.custom_deriv(theta);
    return central_diff(c.custom_value, theta);
  }
  return builtin_deriv(c, theta);
}

double SaturableFamily::gtilde_second(int j, double theta) const {
  const auto& c = spec(j);
  if (!(theta >= 0.0))
    throw std::invalid_argument("squared modulus argument must be nonnegative");
  if (c.profile == Profile::Custom) {
    if (c.custom_second) return c.custom_second(theta);
    if (c.custom_deriv) return central_diff(c.custom_deriv, theta);
    const double h = std::max(1e-4, 1e-4 * theta);
    const double lo = std::max(0.0, theta - h);
    const double mid = 0.5 * (lo + theta + h);
    const double f0 = c.custom_value(lo), f1 = c.custom_value(mid),
                 f2 = c.custom_value(theta + h);
    const double hh = 0.5 * (theta + h - lo);
    return (f2 - 2.0 * f1 + f0) / (hh * hh);
  }
  return builtin_second(c, theta);
}

ComplexField g_eval(const SaturableFamily& family, int j, const ComplexField& u) {
  if (u.rep() != Rep::Physical)
    throw std::invalid_argument("noise coefficient acts in physical representation");
  ComplexField out = u;
  for (auto& v : out.values()) v *= family.gtilde(j, std::norm(v));
  return out;
}

AssumptionReport assumption_check(const SaturableFamily& family,
                                  double theta_max, int samples) {
  if (!(theta_max > 1.0) || samples < 16)
    throw std::invalid_argument("assumption check needs theta_max > 1 and >= 16 samples");
  AssumptionReport rep;

  // Log-spaced sweep of the weighted derivative functional.
  const double log_lo = std::log(1e-3), log_hi = std::log(theta_max);
  double tail_sup = 0.0, body_sup = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / (samples - 1);
    const double theta = i == 0 ? 0.0 : std::exp(log_lo + t * (log_hi - log_lo));
    double func = 0.0, val = 0.0;
    for (int j = 0; j < family.channels(); ++j) {
      const double g0 = family.gtilde(j, theta);
      const double g1 = family.gtilde_deriv(j, theta);
      const double g2 = family.gtilde_second(j, theta);
      val = std::max(val, std::abs(g0));
      func = std::max(func, std::abs(g0) + (1.0 + theta) * std::abs(g1) +
                                (1.0 + std::pow(theta, 1.5)) * std::abs(g2));
    }
    if (!std::isfinite(func)) {
      rep.bounded = false;
      rep.notes.push_back("functional not finite at sampled point");
      return rep;
    }
    rep.gtilde_sup = std::max(rep.gtilde_sup, val);
    rep.boundedness_sup = std::max(rep.boundedness_sup, func);
    if (t > 0.75)
      tail_sup = std::max(tail_sup, func);
    else if (t > 0.5)
      body_sup = std::max(body_sup, func);
  }
  rep.tail_ratio = body_sup > 0.0 ? tail_sup / body_sup : 1.0;

  // Empirical Lipschitz constant of y -> gtilde(|y|^2) y over random pairs.
  Rng rng(0x5313579BDF02468AULL);
  const double radius = std::sqrt(std::min(theta_max, 1e4));
  for (int trial = 0; trial < 4096; ++trial) {
    const cplx y1 = radius * rng.uniform() *
                    std::exp(cplx(0.0, 2.0 * M_PI * rng.uniform()));
    const cplx y2 = y1 + 0.1 * radius * rng.complex_normal();
    const double dy = std::abs(y1 - y2);
    if (dy < 1e-12) continue;
    for (int j = 0; j < family.channels(); ++j) {
      const double dg = std::abs(family.gtilde(j, std::norm(y1)) * y1 -
                                 family.gtilde(j, std::norm(y2)) * y2);
      rep.lipschitz = std::max(rep.lipschitz, dg / dy);
    }
  }

  rep.bounded = rep.tail_ratio <= 1.05 && std::isfinite(rep.boundedness_sup);
  if (!rep.bounded)
    rep.notes.push_back("weighted derivative functional grows with theta");
  return rep;
}

}  // namespace snls

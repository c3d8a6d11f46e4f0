#include "snls/levy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snls {

namespace {

double euclid_norm(const std::vector<double>& z) {
  double s = 0.0;
  for (double v : z) s += v * v;
  return std::sqrt(s);
}

}  // namespace

LevyMeasure LevyMeasure::discrete(std::vector<std::vector<double>> atoms,
                                  std::vector<double> weights) {
  if (atoms.empty() || atoms.size() != weights.size())
    throw std::invalid_argument("discrete measure needs matching atom and weight lists");
  const int dim = static_cast<int>(atoms.front().size());
  if (dim < 1) throw std::invalid_argument("marks need at least one component");
  for (const auto& z : atoms) {
    if (static_cast<int>(z.size()) != dim)
      throw std::invalid_argument("atoms must share a mark dimension");
    const double r = euclid_norm(z);
    if (r > 1.0 + 1e-12)
      throw std::invalid_argument("atom lies outside the unit ball");
    if (r < 1e-12)
      throw std::invalid_argument("atom at the origin is not allowed");
  }
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("atom weights must be positive and finite");

  LevyMeasure m;
  m.discrete_ = true;
  m.mark_dim_ = dim;
  m.atoms_ = std::move(atoms);
  m.weights_ = std::move(weights);
  m.drift_.assign(dim, 0.0);
  for (std::size_t i = 0; i < m.atoms_.size(); ++i) {
    m.total_mass_ += m.weights_[i];
    const double r = euclid_norm(m.atoms_[i]);
    m.second_moment_ += m.weights_[i] * r * r;
    for (int j = 0; j < dim; ++j) m.drift_[j] += m.weights_[i] * m.atoms_[i][j];
  }
  return m;
}

LevyMeasure LevyMeasure::discrete_scalar(std::vector<double> atoms,
                                         std::vector<double> weights) {
  std::vector<std::vector<double>> a;
  a.reserve(atoms.size());
  for (double z : atoms) a.push_back({z});
  return discrete(std::move(a), std::move(weights));
}

LevyMeasure LevyMeasure::radial(double c, double alpha, double r_min, double r_max) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::invalid_argument("radial density scale must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("radial exponent must be nonnegative");
  if (!(r_min > 0.0) || !(r_max > r_min) || r_max > 1.0 + 1e-12)
    throw std::invalid_argument("radial band needs 0 < r_min < r_max <= 1");

  LevyMeasure m;
  m.discrete_ = false;
  m.mark_dim_ = 1;
  m.radial_c_ = c;
  m.radial_alpha_ = alpha;
  m.radial_rmin_ = r_min;
  m.radial_rmax_ = r_max;
  // Two symmetric lobes, density c |z|^{-1-alpha} each.
  if (alpha > 0.0)
    m.total_mass_ = 2.0 * c * (std::pow(r_min, -alpha) - std::pow(r_max, -alpha)) / alpha;
  else
    m.total_mass_ = 2.0 * c * std::log(r_max / r_min);
  if (std::abs(alpha - 2.0) > 1e-12)
    m.second_moment_ = 2.0 * c *
        (std::pow(r_max, 2.0 - alpha) - std::pow(r_min, 2.0 - alpha)) / (2.0 - alpha);
  else
    m.second_moment_ = 2.0 * c * std::log(r_max / r_min);
  m.drift_.assign(1, 0.0);
  return m;
}

int LevyMeasure::atom_count() const {
  return discrete_ ? static_cast<int>(atoms_.size()) : 0;
}

const std::vector<double>& LevyMeasure::atom(int i) const {
  if (!discrete_ || i < 0 || i >= atom_count())
    throw std::out_of_range("atom index out of range");
  return atoms_[i];
}

double LevyMeasure::weight(int i) const {
  if (!discrete_ || i < 0 || i >= atom_count())
    throw std::out_of_range("atom index out of range");
  return weights_[i];
}

int LevyMeasure::sample_mark(Rng& rng, std::vector<double>& mark) const {
  if (discrete_) {
    const std::size_t i = rng.weighted_index(weights_, total_mass_);
    mark = atoms_[i];
    return static_cast<int>(i);
  }
  // Inverse transform on the radius, then a symmetric sign.
  const double u = rng.uniform();
  double r;
  if (radial_alpha_ > 0.0) {
    const double a = std::pow(radial_rmin_, -radial_alpha_);
    const double b = std::pow(radial_rmax_, -radial_alpha_);
    r = std::pow(a - u * (a - b), -1.0 / radial_alpha_);
  } else {
    r = radial_rmin_ * std::pow(radial_rmax_ / radial_rmin_, u);
  }
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  mark.assign(1, sign * r);
  return -1;
}

std::vector<JumpEvent> sample_prm(const LevyMeasure& measure, double eps, double horizon,
                                  Rng& rng) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("noise scale must be positive and finite");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("horizon must be positive and finite");
  const double rate = measure.total_mass() / eps;
  std::vector<JumpEvent> events;
  double t = rng.exponential(rate);
  while (t < horizon) {
    JumpEvent e;
    e.time = t;
    e.atom = measure.sample_mark(rng, e.mark);
    events.push_back(std::move(e));
    t += rng.exponential(rate);
  }
  return events;
}

std::vector<JumpEvent> sample_controlled_prm(const LevyMeasure& measure,
                                             const Control& psi, double eps,
                                             double horizon, Rng& rng) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("noise scale must be positive and finite");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("horizon must be positive and finite");
  if (psi.horizon() < horizon - 1e-12)
    throw std::invalid_argument("control grid does not cover the horizon");
  if (measure.is_discrete() && psi.columns() != 1 &&
      psi.columns() != measure.atom_count())
    throw std::invalid_argument("control columns must match the atom count or be one");
  if (!measure.is_discrete() && psi.columns() != 1)
    throw std::invalid_argument("non-atomic measures take a single-column control");

  const double psi_max = psi.max_value();
  if (psi_max <= 0.0) return {};
  const double rate = psi_max * measure.total_mass() / eps;
  std::vector<JumpEvent> events;
  double t = rng.exponential(rate);
  while (t < horizon) {
    JumpEvent e;
    e.time = t;
    e.atom = measure.sample_mark(rng, e.mark);
    const int column = e.atom >= 0 ? e.atom : 0;
    const double ratio = psi.value_at(t, column) / psi_max;
    // Skipping the accept draw at ratio one keeps the stream identical to
    // the untilted sampler when psi == 1.
    if (ratio >= 1.0 || rng.uniform() < ratio) events.push_back(std::move(e));
    t += rng.exponential(rate);
  }
  return events;
}

double weighted_gtilde(const SaturableFamily& family, std::span<const double> w,
                       double theta) {
  if (static_cast<int>(w.size()) != family.channels())
    throw std::invalid_argument("weight count must match the channel count");
  double s = 0.0;
  for (int j = 0; j < family.channels(); ++j) s += w[j] * family.gtilde(j, theta);
  return s;
}

cplx marcus_flow(cplx y, std::span<const double> z, double eps,
                 const SaturableFamily& family) {
  const double angle = eps * weighted_gtilde(family, z, std::norm(y));
  return std::exp(cplx(0.0, -angle)) * y;
}

cplx marcus_flow_ode(cplx y, std::span<const double> z, double eps,
                     const SaturableFamily& family, int steps) {
  if (steps < 1) throw std::invalid_argument("flow integration needs at least one step");
  auto rhs = [&](cplx v) {
    return cplx(0.0, -eps * weighted_gtilde(family, z, std::norm(v))) * v;
  };
  const double h = 1.0 / steps;
  cplx v = y;
  for (int s = 0; s < steps; ++s) {
    const cplx k1 = rhs(v);
    const cplx k2 = rhs(v + 0.5 * h * k1);
    const cplx k3 = rhs(v + 0.5 * h * k2);
    const cplx k4 = rhs(v + h * k3);
    v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return v;
}

cplx marcus_jump_increment(cplx y, std::span<const double> z, double eps,
                           const SaturableFamily& family) {
  return marcus_flow(y, z, eps, family) - y;
}

cplx marcus_flow_remainder(cplx y, std::span<const double> z, double eps,
                           const SaturableFamily& family) {
  const double theta = weighted_gtilde(family, z, std::norm(y));
  return marcus_flow(y, z, eps, family) - y + cplx(0.0, eps * theta) * y;
}

void apply_marcus_flow(ComplexField& u, std::span<const double> z, double eps,
                       const SaturableFamily& family) {
  if (u.rep() != Rep::Physical)
    throw std::invalid_argument("jump map acts in physical representation");
  for (auto& v : u.values()) {
    const double angle = eps * weighted_gtilde(family, z, std::norm(v));
    v *= cplx(std::cos(angle), -std::sin(angle));
  }
}

std::vector<double> control_moments(const LevyMeasure& measure, const Control& psi,
                                    double t) {
  std::vector<double> c(measure.mark_dim(), 0.0);
  if (measure.is_discrete()) {
    for (int i = 0; i < measure.atom_count(); ++i) {
      const double tilt = psi.value_at(t, i) - 1.0;
      for (int j = 0; j < measure.mark_dim(); ++j)
        c[j] += measure.weight(i) * measure.atom(i)[j] * tilt;
    }
  } else {
    // Symmetric band: first moments vanish, so a mark-independent tilt
    // contributes (psi - 1) * 0.
    const double tilt = psi.value_at(t, 0) - 1.0;
    for (int j = 0; j < measure.mark_dim(); ++j)
      c[j] = tilt * measure.drift_moments()[j];
  }
  return c;
}

double controlled_mass(const LevyMeasure& measure, const Control& psi, double t) {
  if (measure.is_discrete()) {
    double s = 0.0;
    for (int i = 0; i < measure.atom_count(); ++i)
      s += measure.weight(i) * psi.value_at(t, i);
    return s;
  }
  return psi.value_at(t, 0) * measure.total_mass();
}

}  // namespace snls

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "snls/spectral.hpp"

namespace snls {

/// Power nonlinearity lambda*|u|^{2 sigma} u with the subcritical exponent
/// window 0 < sigma < 2/dim.
struct NonlinearitySpec {
  double lambda = 1.0;
  double sigma = 1.0;
  int dim = 1;

  static NonlinearitySpec make(double lambda, double sigma, int dim);

  /// Spatial Lebesgue exponent r = 2 sigma + 2 paired with this nonlinearity.
  double lebesgue_r() const { return 2.0 * sigma + 2.0; }
  /// Time exponent p with 2/p = dim/2 - dim/r.
  double lebesgue_p() const { return (4.0 * sigma + 4.0) / (dim * sigma); }
};

ComplexField f_eval(const NonlinearitySpec& spec, const ComplexField& u);

enum class Profile { Saturating, SqrtSaturating, Rational, LogSaturating, Custom };

Profile profile_from_name(const std::string& name);
std::string profile_name(Profile p);

/// One noise channel: a scalar shape gtilde acting on the squared modulus,
/// g_j(u) = gtilde_j(|u|^2) * u.  Built-in shapes take a scale rho > 0;
/// custom shapes supply the value and optionally derivatives (missing
/// derivatives fall back to central differences).
struct ChannelSpec {
  Profile profile = Profile::Saturating;
  double rho = 1.0;
  std::function<double(double)> custom_value;
  std::function<double(double)> custom_deriv;
  std::function<double(double)> custom_second;
};

class SaturableFamily {
public:
  explicit SaturableFamily(std::vector<ChannelSpec> channels);
  static SaturableFamily uniform(int m, Profile profile, double rho = 1.0);

  int channels() const { return static_cast<int>(specs_.size()); }
  const ChannelSpec& spec(int j) const;

  double gtilde(int j, double theta) const;
  double gtilde_deriv(int j, double theta) const;
  double gtilde_second(int j, double theta) const;

private:
  std::vector<ChannelSpec> specs_;
};

/// g_j applied pointwise to a physical-representation field.
ComplexField g_eval(const SaturableFamily& family, int j, const ComplexField& u);

/// Empirical check of the smoothness and boundedness a noise family must
/// satisfy: linear-growth constant of g, Lipschitz constant over random
/// pairs, and the weighted derivative functional
///   gtilde + (1+theta)|gtilde'| + (1+theta^{3/2})|gtilde''|
/// sampled up to theta_max.  A growing tail flags divergence.
struct AssumptionReport {
  double gtilde_sup = 0.0;
  double lipschitz = 0.0;
  double boundedness_sup = 0.0;
  double tail_ratio = 0.0;
  bool bounded = false;
  std::vector<std::string> notes;
};

AssumptionReport assumption_check(const SaturableFamily& family,
                                  double theta_max = 1e6, int samples = 4096);

}  // namespace snls

#pragma once

#include <span>
#include <vector>

#include "snls/coefficients.hpp"
#include "snls/control_grid.hpp"
#include "snls/rng.hpp"
#include "snls/spectral.hpp"

namespace snls {

class Rng;

struct JumpEvent {
  double time = 0.0;
  std::vector<double> mark;
  int atom = -1;  // atom index for discrete measures, -1 otherwise
};

/// Finite intensity measure on marks, supported in the closed unit ball and
/// bounded away from the origin.  Either a weighted atom list or a symmetric
/// one-dimensional power-law band c |z|^{-1-alpha} on r_min <= |z| <= r_max.
class LevyMeasure {
public:
  static LevyMeasure discrete(std::vector<std::vector<double>> atoms,
                              std::vector<double> weights);
  /// Scalar-mark convenience wrapper.
  static LevyMeasure discrete_scalar(std::vector<double> atoms,
                                     std::vector<double> weights);
  static LevyMeasure radial(double c, double alpha, double r_min, double r_max);

  bool is_discrete() const { return discrete_; }
  int mark_dim() const { return mark_dim_; }
  double total_mass() const { return total_mass_; }
  double second_moment() const { return second_moment_; }
  /// First moments m_j = integral of z_j; the compensator drift.
  const std::vector<double>& drift_moments() const { return drift_; }

  int atom_count() const;
  const std::vector<double>& atom(int i) const;
  double weight(int i) const;

  /// Mark draw from the normalized measure; returns the atom index or -1.
  int sample_mark(Rng& rng, std::vector<double>& mark) const;

private:
  LevyMeasure() = default;
  bool discrete_ = true;
  int mark_dim_ = 1;
  double total_mass_ = 0.0;
  double second_moment_ = 0.0;
  std::vector<double> drift_;
  std::vector<std::vector<double>> atoms_;
  std::vector<double> weights_;
  double radial_c_ = 0.0, radial_alpha_ = 0.0, radial_rmin_ = 0.0, radial_rmax_ = 0.0;
};

/// Poisson random measure sample on [0, T] with intensity (1/eps) * measure:
/// exponential gaps at rate total_mass/eps, marks independent of times.
std::vector<JumpEvent> sample_prm(const LevyMeasure& measure, double eps, double horizon,
                                  Rng& rng);

/// Tilted sample with intensity (1/eps) * psi(t, z) * measure, by thinning
/// under the constant majorant max(psi).  When the acceptance ratio reaches
/// one the accept draw is skipped, so psi == 1 replays sample_prm exactly.
std::vector<JumpEvent> sample_controlled_prm(const LevyMeasure& measure,
                                             const Control& psi, double eps,
                                             double horizon, Rng& rng);

/// Sum_j w_j * gtilde_j(theta); the scalar angle through which every jump
/// and drift substep rotates the state.
double weighted_gtilde(const SaturableFamily& family, std::span<const double> w,
                       double theta);

/// Time-1 flow of dphi/ds = -i eps sum_j z_j gtilde_j(|phi|^2) phi.  The
/// squared modulus is conserved along the flow, so the angle is constant
/// and the map is the exact rotation exp(-i eps sum_j z_j gtilde_j(|y|^2)) y.
cplx marcus_flow(cplx y, std::span<const double> z, double eps,
                 const SaturableFamily& family);

/// Same flow integrated numerically with `steps` classical Runge-Kutta
/// steps; independent check of the closed form.
cplx marcus_flow_ode(cplx y, std::span<const double> z, double eps,
                     const SaturableFamily& family, int steps);

/// G(eps, z, y) = flow - y.
cplx marcus_jump_increment(cplx y, std::span<const double> z, double eps,
                           const SaturableFamily& family);

/// H(eps, z, y) = flow - y + i eps (sum_j z_j gtilde_j(|y|^2)) y; the
/// second-order remainder after removing the linearized jump.
cplx marcus_flow_remainder(cplx y, std::span<const double> z, double eps,
                           const SaturableFamily& family);

/// Applies the Marcus jump map pointwise to a physical-representation field.
void apply_marcus_flow(ComplexField& u, std::span<const double> z, double eps,
                       const SaturableFamily& family);

/// c_j(t) = integral of z_j (psi(t, z) - 1) d(measure); the drift the tilt
/// adds on top of the compensator.
std::vector<double> control_moments(const LevyMeasure& measure, const Control& psi,
                                    double t);

/// Integral of psi(t, z) d(measure); the instantaneous tilted jump rate
/// multiplier of 1/eps.
double controlled_mass(const LevyMeasure& measure, const Control& psi, double t);

}  // namespace snls

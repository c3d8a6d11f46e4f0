#pragma once

#include <cstdint>
#include <vector>

#include "snls/levy.hpp"
#include "snls/spectral.hpp"

namespace snls {

struct NormSample {
  double time = 0.0;
  double l2 = 0.0;
  double lr = 0.0;
};

/// Time-stamped snapshots of one solver run, plus the jump record and a
/// dense norm log sampled at every solver step.
struct Trajectory {
  std::vector<double> times;
  std::vector<ComplexField> states;
  std::vector<JumpEvent> jumps;
  std::vector<NormSample> norm_series;
  std::uint64_t seed = 0;
  /// Largest lr norm seen along the run, scaled by the guard threshold.
  double stability_number = 0.0;

  const ComplexField& initial() const { return states.front(); }
  const ComplexField& terminal() const { return states.back(); }
  double horizon() const { return times.back(); }
};

/// Components of the solution-space norm: a running maximum of the l2 norm
/// plus a left-endpoint Riemann sum of the lr norm in time,
///   sup_t ||u(t)||_2  +  (sum dt * ||u(t)||_r^p)^{1/p}.
/// total() is their sum.
struct NormReport {
  double sup_l2 = 0.0;
  double time_lr = 0.0;
  double p = 0.0;
  double r = 0.0;
  double max_gap = 0.0;
  double total() const { return sup_l2 + time_lr; }
};

/// Mixed norm of a trajectory for an admissible exponent pair.
NormReport mixed_norm(const Trajectory& traj, double p, double r);

/// Mixed norm of the snapshot-wise difference of two runs on matching
/// time grids and a shared spatial grid.
NormReport enorm_distance(const Trajectory& a, const Trajectory& b, double p, double r);

}  // namespace snls

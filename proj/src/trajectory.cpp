#include "snls/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace snls {

namespace {

void validate_grid_pair(const Trajectory& traj, double p, double r) {
  if (traj.times.size() != traj.states.size())
    throw std::invalid_argument("trajectory times and states must align");
  if (traj.times.size() < 2)
    throw std::invalid_argument("mixed norm needs at least two snapshots");
  for (std::size_t i = 0; i + 1 < traj.times.size(); ++i)
    if (!(traj.times[i + 1] > traj.times[i]))
      throw std::invalid_argument("snapshot times must increase strictly");
  const auto& g0 = traj.states.front().grid_ptr();
  for (const auto& s : traj.states) {
    if (s.grid_ptr() != g0)
      throw std::invalid_argument("snapshots must share one grid");
    if (s.rep() != Rep::Physical)
      throw std::invalid_argument("mixed norm needs physical snapshots");
  }
  if (!admissible_pair_check(p, r, g0->dim()))
    throw std::invalid_argument("exponent pair is not admissible for this dimension");
}

}  // namespace

NormReport mixed_norm(const Trajectory& traj, double p, double r) {
  validate_grid_pair(traj, p, r);
  NormReport rep;
  rep.p = p;
  rep.r = r;
  double riemann = 0.0, lr_max = 0.0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    rep.sup_l2 = std::max(rep.sup_l2, l2_norm(traj.states[i]));
    const double lr = lr_norm(traj.states[i], r);
    lr_max = std::max(lr_max, lr);
    if (i + 1 < traj.states.size()) {
      const double dt = traj.times[i + 1] - traj.times[i];
      rep.max_gap = std::max(rep.max_gap, dt);
      if (!std::isinf(p)) riemann += dt * std::pow(lr, p);
    }
  }
  rep.time_lr = std::isinf(p) ? lr_max : std::pow(riemann, 1.0 / p);
  return rep;
}

NormReport enorm_distance(const Trajectory& a, const Trajectory& b, double p, double r) {
  validate_grid_pair(a, p, r);
  validate_grid_pair(b, p, r);
  if (a.times.size() != b.times.size())
    throw std::invalid_argument("trajectories must share the time grid");
  for (std::size_t i = 0; i < a.times.size(); ++i)
    if (std::abs(a.times[i] - b.times[i]) > 1e-12 * std::max(1.0, std::abs(a.times[i])))
      throw std::invalid_argument("trajectories must share the time grid");
  if (a.states.front().grid_ptr() != b.states.front().grid_ptr())
    throw std::invalid_argument("trajectories must share the spatial grid");

  NormReport rep;
  rep.p = p;
  rep.r = r;
  double riemann = 0.0, lr_max = 0.0;
  ComplexField diff(a.states.front().grid_ptr());
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    for (std::size_t x = 0; x < diff.size(); ++x)
      diff[x] = a.states[i][x] - b.states[i][x];
    rep.sup_l2 = std::max(rep.sup_l2, l2_norm(diff));
    const double lr = lr_norm(diff, r);
    lr_max = std::max(lr_max, lr);
    if (i + 1 < a.states.size()) {
      const double dt = a.times[i + 1] - a.times[i];
      rep.max_gap = std::max(rep.max_gap, dt);
      if (!std::isinf(p)) riemann += dt * std::pow(lr, p);
    }
  }
  rep.time_lr = std::isinf(p) ? lr_max : std::pow(riemann, 1.0 / p);
  return rep;
}

}  // namespace snls

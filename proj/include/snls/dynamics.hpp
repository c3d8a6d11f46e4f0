#pragma once

#include <stdexcept>

#include "snls/coefficients.hpp"
#include "snls/control_grid.hpp"
#include "snls/levy.hpp"
#include "snls/trajectory.hpp"

namespace snls {

struct SolverConfig {
  double dt = 1e-3;
  /// Uniform snapshots every `snapshot_stride` steps (initial and terminal
  /// states are always kept).
  int snapshot_stride = 50;
  /// Additionally snapshot the post-jump state at every jump time.  Runs
  /// meant for trajectory distances keep this off so time grids align.
  bool record_jump_snapshots = false;
  /// Project onto the lower two thirds of the spectrum after each step.
  bool dealias = false;
  /// Runge-Kutta substeps for the smoothed drift of the regularized solver.
  int yosida_substeps = 4;
  /// Run aborts when the pointwise modulus exceeds this threshold.
  double blowup_guard = 1e6;
};

struct BlowupError : std::runtime_error {
  explicit BlowupError(double t);
  double time;
};

/// Deterministic equation du/dt = i Lap u - i lambda |u|^{2 sigma} u by
/// Strang splitting: exact free flow in Fourier space around an exact
/// pointwise phase rotation.
Trajectory solve_nls(const ComplexField& u0, const NonlinearitySpec& spec, double T,
                     const SolverConfig& cfg);

/// Controlled deterministic equation with the tilt-induced drift
/// -i sum_j c_j(t) g_j(Y), where c_j are the tilt moments of psi.  Control
/// bin edges must fall on step boundaries.
Trajectory solve_skeleton(const ComplexField& u0, const Control& psi,
                          const LevyMeasure& measure, const SaturableFamily& family,
                          const NonlinearitySpec& spec, double T, const SolverConfig& cfg);

/// Same equation with every non-free term smoothed by the resolvent factor
/// mu (mu - Lap)^{-1}: drift -i J f(J Y) - i sum_j c_j J g_j(J Y), initial
/// state J u0.  The drift is no longer pointwise, so it is integrated with
/// classical Runge-Kutta substeps between the exact free half-steps.
Trajectory solve_skeleton_yosida(const ComplexField& u0, const Control& psi, double mu,
                                 const LevyMeasure& measure, const SaturableFamily& family,
                                 const NonlinearitySpec& spec, double T,
                                 const SolverConfig& cfg);

/// Jump-driven equation for a fixed event list: between jumps the drift
/// +i sum_j m_j g_j(u) compensates the mean jump rotation, at each event
/// the state passes through the exact jump flow.
Trajectory solve_jump_driven(const ComplexField& u0, double eps,
                             const std::vector<JumpEvent>& jumps,
                             const LevyMeasure& measure, const SaturableFamily& family,
                             const NonlinearitySpec& spec, double T,
                             const SolverConfig& cfg);

/// Samples the jump record at intensity measure/eps and runs the jump-driven
/// scheme.
Trajectory solve_stochastic(const ComplexField& u0, double eps,
                            const LevyMeasure& measure, const SaturableFamily& family,
                            const NonlinearitySpec& spec, double T, Rng& rng,
                            const SolverConfig& cfg);

/// Same scheme driven by the tilted jump record (intensity psi*measure/eps).
/// The between-jump drift is unchanged; the tilt enters only through the
/// event times.
Trajectory solve_controlled(const ComplexField& u0, double eps, const Control& psi,
                            const LevyMeasure& measure, const SaturableFamily& family,
                            const NonlinearitySpec& spec, double T, Rng& rng,
                            const SolverConfig& cfg);

}  // namespace snls

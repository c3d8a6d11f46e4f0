#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "snls/control_grid.hpp"
#include "snls/dynamics.hpp"

namespace snls {

/// Pointwise entropy ell(x) = x log x - x + 1, continuously extended by
/// ell(0) = 1; nonnegative, strictly convex, zero exactly at x = 1.
double entropy_ell(double x);

/// Entropy cost of a tilt relative to the untilted noise: the sum over
/// grid cells of (bin length) * (measure weight) * ell(psi).  Single-column
/// tilts weigh by the total mass.
double q_cost(const Control& psi, const LevyMeasure& measure);

/// Whether the cost stays within the budget.
bool wn_membership(const Control& psi, const LevyMeasure& measure, double budget);

/// Scalar functional of a finished run used as an event target.
struct TrajectoryObservable {
  std::function<double(const Trajectory&)> eval;
  std::string description;
};

/// l2 distance of the terminal state from a fixed reference state.
TrajectoryObservable terminal_distance_observable(ComplexField reference);
/// Squared-modulus mass inside [x_lo, x_hi] at the final time (1d grids).
TrajectoryObservable window_mass_observable(double x_lo, double x_hi);

struct InstantonSettings {
  int max_iterations = 60;       // descent iterations per penalty round
  int penalty_rounds = 3;
  double penalty_initial = 20.0;
  double penalty_growth = 10.0;
  double probe_step = 1e-4;      // central-difference probe, relative
  double initial_step = 0.5;     // first line-search trial step
  double feasibility_tol = 1e-3;
  double value_tol = 1e-10;      // round stops when progress stalls below this
};

struct InstantonTrace {
  int round = 0;
  int iteration = 0;
  double penalized = 0.0;
  double cost = 0.0;
  double shortfall = 0.0;
};

struct InstantonReport {
  double rate = 0.0;        // entropy cost at the minimizer
  Control minimizer;
  double observable = 0.0;  // target functional at the minimizer
  double shortfall = 0.0;   // max(0, level - observable)
  bool feasible = false;
  std::vector<InstantonTrace> trace;
};

/// Cheapest tilt whose skeleton run reaches the target level, found by
/// minimizing q_cost + kappa * max(0, level - F)^2 with projected gradient
/// descent (psi >= 0 by clamping) and an escalating penalty kappa.  The
/// trace records every accepted iterate; the penalized value never
/// increases within a round.
InstantonReport instanton_search(const TrajectoryObservable& target, double level,
                                 const Control& initial, const ComplexField& u0,
                                 const LevyMeasure& measure, const SaturableFamily& family,
                                 const NonlinearitySpec& spec, double T,
                                 const SolverConfig& cfg, const InstantonSettings& settings);

struct RareEventRow {
  double eps = 0.0;
  long samples = 0;
  long hits = 0;
  double p_hat = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  double eps_log_p = 0.0;  // eps * log(p_hat); meaningful only when resolved
  bool resolved = false;   // at least one hit
};

/// Hit frequencies of {F >= level} under the untilted dynamics for each
/// noise scale, with Wilson 95% intervals.  Path seeds derive from the
/// master seed and a global path index, so results do not depend on the
/// worker count.
std::vector<RareEventRow> rare_event_mc(const TrajectoryObservable& target, double level,
                                        const std::vector<double>& eps_list, long samples,
                                        const ComplexField& u0, const LevyMeasure& measure,
                                        const SaturableFamily& family,
                                        const NonlinearitySpec& spec, double T,
                                        const SolverConfig& cfg, std::uint64_t master_seed,
                                        int workers);

struct ContinuityRow {
  double scale = 0.0;     // interpolation denominator n
  double distance = 0.0;  // trajectory distance to the limit run
};

/// Skeleton runs along the family psi_n = 1 + (psi - 1)(1 - 1/n), which
/// approaches psi as n grows; reports the distance to the run at psi.
std::vector<ContinuityRow> skeleton_continuity_experiment(
    const Control& psi, const std::vector<double>& scales, const ComplexField& u0,
    const LevyMeasure& measure, const SaturableFamily& family,
    const NonlinearitySpec& spec, double T, const SolverConfig& cfg);

struct ConvergenceRow {
  double eps = 0.0;
  long samples = 0;
  long exceed = 0;
  double exceed_prob = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  double mean_distance = 0.0;
};

/// Frequency of {distance(controlled run, skeleton run) >= delta} across
/// noise scales; the controlled runs share the skeleton's snapshot grid.
std::vector<ConvergenceRow> controlled_convergence_experiment(
    const Control& psi, const std::vector<double>& eps_list, double delta, long paths,
    const ComplexField& u0, const LevyMeasure& measure, const SaturableFamily& family,
    const NonlinearitySpec& spec, double T, const SolverConfig& cfg,
    std::uint64_t master_seed, int workers);

}  // namespace snls

#include "snls/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "snls/parallel.hpp"

namespace snls {

Control::Control(std::vector<double> bin_edges, int columns, std::vector<double> values)
    : edges_(std::move(bin_edges)), columns_(columns), values_(std::move(values)) {
  if (edges_.size() < 2)
    throw std::invalid_argument("control grid needs at least one bin");
  for (std::size_t i = 0; i + 1 < edges_.size(); ++i)
    if (!(edges_[i + 1] > edges_[i]))
      throw std::invalid_argument("control bin edges must increase strictly");
  if (!(edges_.front() == 0.0))
    throw std::invalid_argument("control grid must start at time zero");
  if (columns_ < 1)
    throw std::invalid_argument("control needs at least one column");
  if (values_.size() != static_cast<std::size_t>(bins()) * columns_)
    throw std::invalid_argument("control value table has the wrong size");
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("control values must be nonnegative and finite");
}

Control Control::constant(double value, double horizon, int bins, int columns) {
  if (!(horizon > 0.0) || bins < 1)
    throw std::invalid_argument("control grid needs a positive horizon and bins");
  std::vector<double> edges(bins + 1);
  for (int i = 0; i <= bins; ++i) edges[i] = horizon * i / bins;
  edges[bins] = horizon;
  return Control(std::move(edges), columns,
                 std::vector<double>(static_cast<std::size_t>(bins) * columns, value));
}

double Control::value(int bin, int column) const {
  if (bin < 0 || bin >= bins() || column < 0 || column >= columns_)
    throw std::out_of_range("control cell out of range");
  return values_[static_cast<std::size_t>(bin) * columns_ + column];
}

double& Control::value(int bin, int column) {
  if (bin < 0 || bin >= bins() || column < 0 || column >= columns_)
    throw std::out_of_range("control cell out of range");
  return values_[static_cast<std::size_t>(bin) * columns_ + column];
}

int Control::bin_index(double t) const {
  if (t < edges_.front() - 1e-12 || t > edges_.back() + 1e-12)
    throw std::out_of_range("time outside the control grid");
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), t);
  const auto i = static_cast<int>(it - edges_.begin()) - 1;
  return std::clamp(i, 0, bins() - 1);
}

double Control::value_at(double t, int column) const {
  const int c = column < columns_ ? column : 0;
  return value(bin_index(t), c);
}

double Control::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

Control Control::refined(int factor) const {
  if (factor < 1) throw std::invalid_argument("refinement factor must be positive");
  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(bins()) * factor + 1);
  for (int b = 0; b < bins(); ++b) {
    const double a = edges_[b], w = edges_[b + 1] - edges_[b];
    for (int s = 0; s < factor; ++s) edges.push_back(a + w * s / factor);
  }
  edges.push_back(edges_.back());
  std::vector<double> vals;
  vals.reserve(values_.size() * factor);
  for (int b = 0; b < bins(); ++b)
    for (int s = 0; s < factor; ++s)
      for (int c = 0; c < columns_; ++c)
        vals.push_back(value(b, c));
  return Control(std::move(edges), columns_, std::move(vals));
}

// ---------------------------------------------------------------------------

double entropy_ell(double x) {
  if (!(x >= 0.0) || !std::isfinite(x))
    throw std::invalid_argument("entropy argument must be nonnegative and finite");
  if (x == 0.0) return 1.0;
  return x * std::log(x) - x + 1.0;
}

namespace {

std::vector<double> column_weights(const Control& psi, const LevyMeasure& measure) {
  if (measure.is_discrete() && psi.columns() == measure.atom_count()) {
    std::vector<double> w(psi.columns());
    for (int i = 0; i < psi.columns(); ++i) w[i] = measure.weight(i);
    return w;
  }
  if (psi.columns() == 1) return {measure.total_mass()};
  throw std::invalid_argument("control columns must match the atom count or be one");
}

struct Wilson {
  double low = 0.0, high = 0.0;
};

Wilson wilson_interval(long hits, long n, double z = 1.959963984540054) {
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace

double q_cost(const Control& psi, const LevyMeasure& measure) {
  const auto w = column_weights(psi, measure);
  double q = 0.0;
  for (int b = 0; b < psi.bins(); ++b) {
    const double len = psi.bin_edges()[b + 1] - psi.bin_edges()[b];
    for (int c = 0; c < psi.columns(); ++c)
      q += len * w[c] * entropy_ell(psi.value(b, c));
  }
  return q;
}

bool wn_membership(const Control& psi, const LevyMeasure& measure, double budget) {
  if (!(budget >= 0.0))
    throw std::invalid_argument("cost budget must be nonnegative");
  return q_cost(psi, measure) <= budget;
}

TrajectoryObservable terminal_distance_observable(ComplexField reference) {
  TrajectoryObservable obs;
  obs.description = "terminal l2 distance from reference";
  obs.eval = [ref = std::move(reference)](const Trajectory& traj) {
    const auto& u = traj.terminal();
    if (u.grid_ptr() != ref.grid_ptr())
      throw std::invalid_argument("observable reference lives on a different grid");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += std::norm(u[i] - ref[i]);
    return std::sqrt(u.grid().cell_volume() * s);
  };
  return obs;
}

TrajectoryObservable window_mass_observable(double x_lo, double x_hi) {
  if (!(x_hi > x_lo))
    throw std::invalid_argument("observable window must have positive length");
  TrajectoryObservable obs;
  obs.description = "terminal mass in a window";
  obs.eval = [x_lo, x_hi](const Trajectory& traj) {
    const auto& u = traj.terminal();
    if (u.grid().dim() != 1)
      throw std::invalid_argument("window mass observable needs a 1d grid");
    const auto& x = u.grid().axis_coordinates();
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (x[i] >= x_lo && x[i] <= x_hi) s += std::norm(u[i]);
    return u.grid().cell_volume() * s;
  };
  return obs;
}

InstantonReport instanton_search(const TrajectoryObservable& target, double level,
                                 const Control& initial, const ComplexField& u0,
                                 const LevyMeasure& measure, const SaturableFamily& family,
                                 const NonlinearitySpec& spec, double T,
                                 const SolverConfig& cfg, const InstantonSettings& settings) {
  if (!target.eval) throw std::invalid_argument("instanton search needs a target");
  if (settings.max_iterations < 1 || settings.penalty_rounds < 1)
    throw std::invalid_argument("instanton search needs positive iteration budgets");

  Control psi = initial;
  auto features = [&](const Control& c, double& cost, double& shortfall) {
    auto traj = solve_skeleton(u0, c, measure, family, spec, T, cfg);
    const double f = target.eval(traj);
    cost = q_cost(c, measure);
    shortfall = std::max(0.0, level - f);
    return f;
  };

  InstantonReport report;
  report.minimizer = psi;
  double kappa = settings.penalty_initial;
  double step0 = settings.initial_step;

  for (int round = 0; round < settings.penalty_rounds; ++round) {
    double cost, shortfall;
    double observable = features(psi, cost, shortfall);
    double value = cost + kappa * shortfall * shortfall;
    report.trace.push_back({round, 0, value, cost, shortfall});

    for (int iter = 1; iter <= settings.max_iterations; ++iter) {
      // Central finite-difference gradient with projection-aware spans.
      auto& vals = psi.values();
      std::vector<double> grad(vals.size());
      for (std::size_t i = 0; i < vals.size(); ++i) {
        const double h = settings.probe_step * std::max(1.0, std::abs(vals[i]));
        const double saved = vals[i];
        const double hi = saved + h;
        const double lo = std::max(0.0, saved - h);
        double c1, s1, c2, s2;
        vals[i] = hi;
        const double fhi = [&] { features(psi, c1, s1); return c1 + kappa * s1 * s1; }();
        vals[i] = lo;
        const double flo = [&] { features(psi, c2, s2); return c2 + kappa * s2 * s2; }();
        vals[i] = saved;
        grad[i] = (fhi - flo) / (hi - lo);
      }
      double gnorm2 = 0.0;
      for (double g : grad) gnorm2 += g * g;
      if (gnorm2 == 0.0) break;

      // Backtracking line search on the projected step.
      double step = step0;
      bool accepted = false;
      Control candidate = psi;
      for (int bt = 0; bt < 40; ++bt) {
        for (std::size_t i = 0; i < vals.size(); ++i)
          candidate.values()[i] = std::max(0.0, vals[i] - step * grad[i]);
        double ccost, cshort;
        const double cobs = features(candidate, ccost, cshort);
        const double cvalue = ccost + kappa * cshort * cshort;
        if (cvalue <= value - 1e-4 * step * gnorm2) {
          psi = candidate;
          value = cvalue;
          cost = ccost;
          shortfall = cshort;
          observable = cobs;
          step0 = std::min(step * 2.0, 8.0);
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      report.trace.push_back({round, iter, value, cost, shortfall});
      if (report.trace.size() >= 2) {
        const auto& prev = report.trace[report.trace.size() - 2];
        if (prev.penalized - value < settings.value_tol) break;
      }
    }

    report.minimizer = psi;
    report.rate = cost;
    report.shortfall = shortfall;
    report.observable = observable;
    kappa *= settings.penalty_growth;
  }
  report.feasible = report.shortfall <= settings.feasibility_tol;
  return report;
}

std::vector<RareEventRow> rare_event_mc(const TrajectoryObservable& target, double level,
                                        const std::vector<double>& eps_list, long samples,
                                        const ComplexField& u0, const LevyMeasure& measure,
                                        const SaturableFamily& family,
                                        const NonlinearitySpec& spec, double T,
                                        const SolverConfig& cfg, std::uint64_t master_seed,
                                        int workers) {
  if (samples < 1) throw std::invalid_argument("sampling needs at least one path");
  if (!target.eval) throw std::invalid_argument("sampling needs a target");
  std::vector<RareEventRow> rows;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const double eps = eps_list[e];
    std::vector<char> hit(samples, 0);
    parallel_for(samples, workers, [&](std::size_t i) {
      Rng rng(derive_stream_seed(master_seed, e * samples + i));
      auto traj = solve_stochastic(u0, eps, measure, family, spec, T, rng, cfg);
      hit[i] = target.eval(traj) >= level ? 1 : 0;
    });
    RareEventRow row;
    row.eps = eps;
    row.samples = samples;
    for (char h : hit) row.hits += h;
    row.p_hat = static_cast<double>(row.hits) / samples;
    const auto ci = wilson_interval(row.hits, samples);
    row.wilson_low = ci.low;
    row.wilson_high = ci.high;
    row.resolved = row.hits > 0;
    row.eps_log_p = row.resolved ? eps * std::log(row.p_hat) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::vector<ContinuityRow> skeleton_continuity_experiment(
    const Control& psi, const std::vector<double>& scales, const ComplexField& u0,
    const LevyMeasure& measure, const SaturableFamily& family,
    const NonlinearitySpec& spec, double T, const SolverConfig& cfg) {
  for (double n : scales)
    if (!(n >= 1.0)) throw std::invalid_argument("continuity scales must be at least one");
  const auto limit = solve_skeleton(u0, psi, measure, family, spec, T, cfg);
  const double p = spec.lebesgue_p(), r = spec.lebesgue_r();
  std::vector<ContinuityRow> rows;
  Control shrunk = psi;
  for (double n : scales) {
    for (std::size_t i = 0; i < psi.values().size(); ++i) {
      const double v = psi.values()[i];
      shrunk.values()[i] = 1.0 + (v - 1.0) * (1.0 - 1.0 / n);
    }
    auto traj = solve_skeleton(u0, shrunk, measure, family, spec, T, cfg);
    rows.push_back({n, enorm_distance(traj, limit, p, r).total()});
  }
  return rows;
}

std::vector<ConvergenceRow> controlled_convergence_experiment(
    const Control& psi, const std::vector<double>& eps_list, double delta, long paths,
    const ComplexField& u0, const LevyMeasure& measure, const SaturableFamily& family,
    const NonlinearitySpec& spec, double T, const SolverConfig& cfg,
    std::uint64_t master_seed, int workers) {
  if (paths < 1) throw std::invalid_argument("experiment needs at least one path");
  if (!(delta > 0.0)) throw std::invalid_argument("exceedance threshold must be positive");
  const auto skeleton = solve_skeleton(u0, psi, measure, family, spec, T, cfg);
  const double p = spec.lebesgue_p(), r = spec.lebesgue_r();
  std::vector<ConvergenceRow> rows;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const double eps = eps_list[e];
    std::vector<double> dist(paths, 0.0);
    parallel_for(paths, workers, [&](std::size_t i) {
      Rng rng(derive_stream_seed(master_seed, e * paths + i));
      auto traj = solve_controlled(u0, eps, psi, measure, family, spec, T, rng, cfg);
      dist[i] = enorm_distance(traj, skeleton, p, r).total();
    });
    ConvergenceRow row;
    row.eps = eps;
    row.samples = paths;
    double sum = 0.0;
    for (double d : dist) {
      sum += d;
      if (d >= delta) ++row.exceed;
    }
    row.exceed_prob = static_cast<double>(row.exceed) / paths;
    row.mean_distance = sum / paths;
    const auto ci = wilson_interval(row.exceed, paths);
    row.wilson_low = ci.low;
    row.wilson_high = ci.high;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace snls

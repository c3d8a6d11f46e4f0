#include "snls/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace snls {

BlowupError::BlowupError(double t)
    : std::runtime_error("pointwise modulus exceeded the stability guard at t = " +
                         std::to_string(t)),
      time(t) {}

namespace {

constexpr double kTimeTol = 1e-9;

// Coefficients of the pointwise rotation generator: the angle per unit time
// at squared modulus theta is -lambda*theta^sigma + sum_j channel_j*
// gtilde_j(theta).  The state is multiplied by exp(i*h*angle).
struct StepPhase {
  double lambda = 0.0;
  double sigma = 1.0;
  bool sigma_one = true;
  const SaturableFamily* family = nullptr;
  const std::vector<double>* channel = nullptr;
};

inline double phase_angle(const StepPhase& ph, double theta) {
  double a = -ph.lambda * (ph.sigma_one ? theta : std::pow(theta, ph.sigma));
  if (ph.channel) {
    const auto& c = *ph.channel;
    for (std::size_t j = 0; j < c.size(); ++j)
      if (c[j] != 0.0) a += c[j] * ph.family->gtilde(static_cast<int>(j), theta);
  }
  return a;
}

void apply_phase(ComplexField& u, const StepPhase& ph, double h) {
  if (ph.lambda == 0.0 && !ph.channel) return;
  for (auto& v : u.values()) {
    const double ang = h * phase_angle(ph, std::norm(v));
    v *= cplx(std::cos(ang), std::sin(ang));
  }
}

std::vector<cplx> half_step_table(const SpectralGrid& g, double h) {
  std::vector<cplx> table(g.size());
  const auto& k2 = g.k_squared();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double ang = -k2[i] * h;
    table[i] = cplx(std::cos(ang), std::sin(ang));
  }
  return table;
}

void free_half(ComplexField& u, const std::vector<cplx>* table, double h, bool dealias) {
  to_fourier(u);
  if (table) {
    const auto& tb = *table;
    for (std::size_t i = 0; i < u.size(); ++i) u[i] *= tb[i];
  } else {
    const auto& k2 = u.grid().k_squared();
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double ang = -k2[i] * h;
      u[i] *= cplx(std::cos(ang), std::sin(ang));
    }
  }
  if (dealias) {
    const auto& g = u.grid();
    const int cutoff = g.points_per_axis() / 3;
    for (std::size_t i = 0; i < u.size(); ++i)
      for (int axis = 0; axis < g.dim(); ++axis)
        if (std::abs(g.axis_frequency(i, axis)) > cutoff) {
          u[i] = 0.0;
          break;
        }
  }
  to_physical(u);
}

// One Strang cycle over an interval of length h.  The cached half-step
// table is only valid for the nominal step size.
void strang_cycle(ComplexField& u, double h, const StepPhase& ph,
                  const std::vector<cplx>* half_table, bool dealias) {
  free_half(u, half_table, 0.5 * h, false);
  apply_phase(u, ph, h);
  free_half(u, half_table, 0.5 * h, dealias);
}

struct StepNorms {
  double l2 = 0.0;
  double lr = 0.0;
  double sup = 0.0;
};

StepNorms step_norms(const ComplexField& u, double r) {
  double s2 = 0.0, sr = 0.0, supsq = 0.0;
  const bool r4 = r == 4.0;
  const bool rinf = std::isinf(r);
  for (const auto& v : u.values()) {
    const double th = std::norm(v);
    s2 += th;
    if (r4)
      sr += th * th;
    else if (!rinf)
      sr += std::pow(th, 0.5 * r);
    supsq = std::max(supsq, th);
  }
  StepNorms out;
  const double cv = u.grid().cell_volume();
  out.l2 = std::sqrt(cv * s2);
  out.sup = std::sqrt(supsq);
  out.lr = rinf ? out.sup : std::pow(cv * sr, 1.0 / r);
  return out;
}

long validated_steps(double T, const SolverConfig& cfg) {
  if (!(T > 0.0) || !std::isfinite(T))
    throw std::invalid_argument("horizon must be positive and finite");
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
    throw std::invalid_argument("step size must be positive and finite");
  if (cfg.snapshot_stride < 1)
    throw std::invalid_argument("snapshot stride must be positive");
  if (!(cfg.blowup_guard > 0.0))
    throw std::invalid_argument("stability guard must be positive");
  const long steps = std::lround(T / cfg.dt);
  if (steps < 1 || std::abs(steps * cfg.dt - T) > kTimeTol * std::max(1.0, T))
    throw std::invalid_argument("horizon must be an integer number of steps");
  return steps;
}

void validate_state(const ComplexField& u0, const NonlinearitySpec& spec) {
  if (u0.rep() != Rep::Physical)
    throw std::invalid_argument("initial state must be in physical representation");
  if (u0.grid().dim() != spec.dim)
    throw std::invalid_argument("initial state dimension does not match the nonlinearity");
}

void validate_control_alignment(const Control& psi, double T, double dt) {
  if (psi.horizon() < T - kTimeTol)
    throw std::invalid_argument("control grid does not cover the horizon");
  for (double e : psi.bin_edges()) {
    if (e > T + kTimeTol) break;
    const double steps = e / dt;
    if (std::abs(steps - std::round(steps)) > kTimeTol / dt)
      throw std::invalid_argument("control bin edges must fall on step boundaries");
  }
}

void validate_jumps(const std::vector<JumpEvent>& jumps, double T, int channels) {
  double prev = 0.0;
  for (const auto& e : jumps) {
    if (!(e.time > 0.0) || e.time > T + kTimeTol)
      throw std::invalid_argument("jump time outside the horizon");
    if (e.time < prev)
      throw std::invalid_argument("jump times must be nondecreasing");
    if (static_cast<int>(e.mark.size()) != channels)
      throw std::invalid_argument("jump mark dimension does not match the channels");
    prev = e.time;
  }
}

// Shared split-step engine.  `channel_at` returns the rotation coefficients
// for the step containing the given time (stable storage, may be null).
Trajectory run_split_step(const ComplexField& u0, const NonlinearitySpec& spec,
                          const SaturableFamily* family,
                          const std::function<const std::vector<double>*(double)>& channel_at,
                          const std::vector<JumpEvent>* jumps, double eps, double T,
                          const SolverConfig& cfg) {
  validate_state(u0, spec);
  const long steps = validated_steps(T, cfg);
  if (jumps && !jumps->empty()) {
    if (!family) throw std::invalid_argument("jump-driven run needs a noise family");
    validate_jumps(*jumps, T, family->channels());
  }

  const double r = spec.lebesgue_r();
  Trajectory traj;
  traj.times.reserve(steps / cfg.snapshot_stride + 2);
  traj.norm_series.reserve(steps + 1);
  if (jumps) traj.jumps = *jumps;

  ComplexField u = u0;
  const auto half_table = half_step_table(u.grid(), 0.5 * cfg.dt);

  auto snapshot = [&](double t) {
    if (!traj.times.empty() && t - traj.times.back() <= 1e-14 * std::max(1.0, t)) {
      traj.states.back() = u;
      return;
    }
    traj.times.push_back(t);
    traj.states.push_back(u);
  };
  auto record_norms = [&](double t) {
    const auto n = step_norms(u, r);
    traj.norm_series.push_back({t, n.l2, n.lr});
    traj.stability_number = std::max(traj.stability_number, n.sup);
    if (n.sup > cfg.blowup_guard) throw BlowupError(t);
  };

  record_norms(0.0);
  snapshot(0.0);

  StepPhase ph;
  ph.lambda = spec.lambda;
  ph.sigma = spec.sigma;
  ph.sigma_one = spec.sigma == 1.0;
  ph.family = family;

  std::size_t jidx = 0;
  for (long k = 0; k < steps; ++k) {
    const double t0 = k * cfg.dt;
    const double t1 = k + 1 == steps ? T : (k + 1) * cfg.dt;
    ph.channel = channel_at ? channel_at(t0 + 0.5 * cfg.dt) : nullptr;

    double cur = t0;
    if (jumps) {
      while (jidx < jumps->size() && (*jumps)[jidx].time <= t1 + 1e-15) {
        const auto& e = (*jumps)[jidx];
        const double gap = e.time - cur;
        if (gap > 1e-12 * cfg.dt)
          strang_cycle(u, gap, ph, nullptr, cfg.dealias);
        apply_marcus_flow(u, e.mark, eps, *family);
        if (cfg.record_jump_snapshots) snapshot(e.time);
        cur = e.time;
        ++jidx;
      }
    }
    const double gap = t1 - cur;
    if (gap > 1e-12 * cfg.dt) {
      const bool whole = cur == t0 && k + 1 < steps;
      strang_cycle(u, gap, ph, whole ? &half_table : nullptr, cfg.dealias);
    }

    record_norms(t1);
    if ((k + 1) % cfg.snapshot_stride == 0 || k + 1 == steps) snapshot(t1);
  }
  return traj;
}

}  // namespace

Trajectory solve_nls(const ComplexField& u0, const NonlinearitySpec& spec, double T,
                     const SolverConfig& cfg) {
  return run_split_step(u0, spec, nullptr, nullptr, nullptr, 1.0, T, cfg);
}

Trajectory solve_skeleton(const ComplexField& u0, const Control& psi,
                          const LevyMeasure& measure, const SaturableFamily& family,
                          const NonlinearitySpec& spec, double T, const SolverConfig& cfg) {
  if (family.channels() != measure.mark_dim())
    throw std::invalid_argument("channel count must match the mark dimension");
  validate_control_alignment(psi, T, cfg.dt);
  // Tilt moments are piecewise constant per control bin; negated because the
  // controlled drift enters with -i c_j g_j.
  std::vector<std::vector<double>> per_bin(psi.bins());
  for (int b = 0; b < psi.bins(); ++b) {
    const double tm = 0.5 * (psi.bin_edges()[b] + psi.bin_edges()[b + 1]);
    per_bin[b] = control_moments(measure, psi, tm);
    for (auto& c : per_bin[b]) c = -c;
  }
  auto channel_at = [&psi, per_bin = std::move(per_bin)](double t) -> const std::vector<double>* {
    return &per_bin[psi.bin_index(t)];
  };
  return run_split_step(u0, spec, &family, channel_at, nullptr, 1.0, T, cfg);
}

Trajectory solve_jump_driven(const ComplexField& u0, double eps,
                             const std::vector<JumpEvent>& jumps,
                             const LevyMeasure& measure, const SaturableFamily& family,
                             const NonlinearitySpec& spec, double T,
                             const SolverConfig& cfg) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("noise scale must be positive and finite");
  if (family.channels() != measure.mark_dim())
    throw std::invalid_argument("channel count must match the mark dimension");
  const auto& m = measure.drift_moments();
  const bool has_drift =
      std::any_of(m.begin(), m.end(), [](double v) { return v != 0.0; });
  std::function<const std::vector<double>*(double)> channel_at;
  if (has_drift)
    channel_at = [&m](double) -> const std::vector<double>* { return &m; };
  return run_split_step(u0, spec, &family, channel_at, &jumps, eps, T, cfg);
}

Trajectory solve_stochastic(const ComplexField& u0, double eps,
                            const LevyMeasure& measure, const SaturableFamily& family,
                            const NonlinearitySpec& spec, double T, Rng& rng,
                            const SolverConfig& cfg) {
  const auto jumps = sample_prm(measure, eps, T, rng);
  return solve_jump_driven(u0, eps, jumps, measure, family, spec, T, cfg);
}

Trajectory solve_controlled(const ComplexField& u0, double eps, const Control& psi,
                            const LevyMeasure& measure, const SaturableFamily& family,
                            const NonlinearitySpec& spec, double T, Rng& rng,
                            const SolverConfig& cfg) {
  const auto jumps = sample_controlled_prm(measure, psi, eps, T, rng);
  return solve_jump_driven(u0, eps, jumps, measure, family, spec, T, cfg);
}

Trajectory solve_skeleton_yosida(const ComplexField& u0, const Control& psi, double mu,
                                 const LevyMeasure& measure, const SaturableFamily& family,
                                 const NonlinearitySpec& spec, double T,
                                 const SolverConfig& cfg) {
  validate_state(u0, spec);
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("resolvent parameter must be positive and finite");
  if (cfg.yosida_substeps < 1)
    throw std::invalid_argument("drift integration needs at least one substep");
  if (family.channels() != measure.mark_dim())
    throw std::invalid_argument("channel count must match the mark dimension");
  const long steps = validated_steps(T, cfg);
  validate_control_alignment(psi, T, cfg.dt);

  std::vector<std::vector<double>> per_bin(psi.bins());
  for (int b = 0; b < psi.bins(); ++b) {
    const double tm = 0.5 * (psi.bin_edges()[b] + psi.bin_edges()[b + 1]);
    per_bin[b] = control_moments(measure, psi, tm);
  }

  const double r = spec.lebesgue_r();
  const bool sigma_one = spec.sigma == 1.0;

  Trajectory traj;
  ComplexField u = yosida_apply(u0, mu);
  const auto half_table = half_step_table(u.grid(), 0.5 * cfg.dt);

  auto snapshot = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(u);
  };
  auto record_norms = [&](double t) {
    const auto n = step_norms(u, r);
    traj.norm_series.push_back({t, n.l2, n.lr});
    traj.stability_number = std::max(traj.stability_number, n.sup);
    if (n.sup > cfg.blowup_guard) throw BlowupError(t);
  };

  record_norms(0.0);
  snapshot(0.0);

  // Smoothed drift: rhs(Y) = -i J [f(J Y) + sum_j c_j g_j(J Y)].
  ComplexField w(u.grid_ptr()), k1(u.grid_ptr()), k2(u.grid_ptr()), k3(u.grid_ptr()),
      k4(u.grid_ptr()), stage(u.grid_ptr());
  auto rhs = [&](const ComplexField& y, const std::vector<double>& c, ComplexField& out) {
    w = y;
    w.set_rep(Rep::Physical);
    yosida_apply_in_place(w, mu);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const cplx v = w[i];
      const double th = std::norm(v);
      double coeff = spec.lambda * (sigma_one ? th : std::pow(th, spec.sigma));
      for (std::size_t j = 0; j < c.size(); ++j)
        if (c[j] != 0.0) coeff += c[j] * family.gtilde(static_cast<int>(j), th);
      out[i] = coeff * v;
    }
    out.set_rep(Rep::Physical);
    yosida_apply_in_place(out, mu);
    for (auto& v : out.values()) v = cplx(v.imag(), -v.real());  // multiply by -i
  };

  for (long k = 0; k < steps; ++k) {
    const double t0 = k * cfg.dt;
    const double t1 = k + 1 == steps ? T : (k + 1) * cfg.dt;
    const auto& c = per_bin[psi.bin_index(t0 + 0.5 * cfg.dt)];

    free_half(u, &half_table, 0.5 * cfg.dt, false);
    const double h = (t1 - t0) / cfg.yosida_substeps;
    for (int s = 0; s < cfg.yosida_substeps; ++s) {
      rhs(u, c, k1);
      for (std::size_t i = 0; i < u.size(); ++i) stage[i] = u[i] + 0.5 * h * k1[i];
      rhs(stage, c, k2);
      for (std::size_t i = 0; i < u.size(); ++i) stage[i] = u[i] + 0.5 * h * k2[i];
      rhs(stage, c, k3);
      for (std::size_t i = 0; i < u.size(); ++i) stage[i] = u[i] + h * k3[i];
      rhs(stage, c, k4);
      for (std::size_t i = 0; i < u.size(); ++i)
        u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    free_half(u, &half_table, 0.5 * cfg.dt, cfg.dealias);

    record_norms(t1);
    if ((k + 1) % cfg.snapshot_stride == 0 || k + 1 == steps) {
      if (traj.times.back() < t1) snapshot(t1);
    }
  }
  return traj;
}

}  // namespace snls

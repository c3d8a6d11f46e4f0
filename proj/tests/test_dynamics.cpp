#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "snls/dynamics.hpp"

using namespace snls;

namespace {

std::shared_ptr<const SpectralGrid> grid1d() { return SpectralGrid::make(1, 256, 40.0); }

NonlinearitySpec cubic(double lambda = 1.0) { return NonlinearitySpec::make(lambda, 1.0, 1); }

SaturableFamily sat1() { return SaturableFamily::uniform(1, Profile::Saturating, 1.0); }

LevyMeasure symmetric4() {
  return LevyMeasure::discrete_scalar({0.25, -0.25, 0.75, -0.75}, {0.5, 0.5, 0.5, 0.5});
}

ComplexField gaussian(std::shared_ptr<const SpectralGrid> g, double amp, double width) {
  return ComplexField::from_function(g, [=](double x) {
    return cplx(amp * std::exp(-x * x / (2.0 * width * width)), 0.0);
  });
}

double terminal_error(const ComplexField& got, const ComplexField& want) {
  double m = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) m = std::max(m, std::abs(got[i] - want[i]));
  return m;
}

double max_l2_drift(const Trajectory& traj) {
  const double n0 = traj.norm_series.front().l2;
  double m = 0.0;
  for (const auto& s : traj.norm_series) m = std::max(m, std::abs(s.l2 - n0) / n0);
  return m;
}

}  // namespace

TEST_CASE("plane wave is resolved exactly by the splitting") {
  auto g = grid1d();
  const double A = 0.8, k = 2.0 * M_PI / 40.0 * 6;
  auto u0 = ComplexField::from_function(g, [&](double x) {
    return A * std::exp(cplx(0.0, k * x));
  });
  SolverConfig cfg;
  cfg.dt = 1e-3;
  const double T = 0.5;
  for (double lambda : {1.0, -1.0}) {
    auto spec = cubic(lambda);
    auto traj = solve_nls(u0, spec, T, cfg);
    const double omega = -(k * k + lambda * A * A);
    auto want = ComplexField::from_function(g, [&](double x) {
      return A * std::exp(cplx(0.0, k * x + omega * T));
    });
    CHECK(terminal_error(traj.terminal(), want) < 1e-10);
    CHECK(max_l2_drift(traj) < 1e-12);
  }
}

TEST_CASE("splitting converges at second order on generic data") {
  auto g = grid1d();
  const double k = 2.0 * M_PI / 40.0 * 6;
  auto u0 = ComplexField::from_function(g, [&](double x) {
    return 0.8 * std::exp(cplx(0.0, k * x)) +
           cplx(0.1 * std::exp(-x * x / 8.0), 0.0);
  });
  auto spec = cubic(1.0);
  const double T = 0.2;
  auto terminal_at = [&](double dt) {
    SolverConfig cfg;
    cfg.dt = dt;
    return solve_nls(u0, spec, T, cfg).terminal();
  };
  const auto ref = terminal_at(5e-4);
  const double e1 = terminal_error(terminal_at(4e-3), ref);
  const double e2 = terminal_error(terminal_at(2e-3), ref);
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);
}

TEST_CASE("all four solvers conserve the l2 norm to 1e-10") {
  auto g = grid1d();
  auto u0 = gaussian(g, 0.5, 3.0);
  auto spec = cubic(1.0);
  auto fam = sat1();
  auto nu = symmetric4();
  SolverConfig cfg;
  cfg.dt = 1e-3;
  const double T = 1.0;

  CHECK(max_l2_drift(solve_nls(u0, spec, T, cfg)) < 1e-10);

  Rng psi_rng(404);
  Control psi = Control::constant(1.0, T, 8, 4);
  for (auto& v : psi.values()) v = psi_rng.uniform(1.0 / 3.0, 3.0);
  CHECK(max_l2_drift(solve_skeleton(u0, psi, nu, fam, spec, T, cfg)) < 1e-10);

  for (std::uint64_t seed : {1ULL, 2ULL}) {
    Rng rng(derive_stream_seed(99, seed));
    auto traj = solve_stochastic(u0, 0.1, nu, fam, spec, T, rng, cfg);
    CHECK(max_l2_drift(traj) < 1e-10);
    Rng rng2(derive_stream_seed(99, seed + 10));
    auto ctraj = solve_controlled(u0, 0.1, psi, nu, fam, spec, T, rng2, cfg);
    CHECK(max_l2_drift(ctraj) < 1e-10);
  }
}

TEST_CASE("unit tilt skeleton reproduces the plain equation exactly") {
  auto g = grid1d();
  auto u0 = gaussian(g, 0.5, 3.0);
  auto spec = cubic(-1.0);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  auto plain = solve_nls(u0, spec, 0.3, cfg);
  auto skel = solve_skeleton(u0, Control::constant(1.0, 0.3, 4, 4), symmetric4(), sat1(),
                             spec, 0.3, cfg);
  CHECK(terminal_error(skel.terminal(), plain.terminal()) <= 1e-15);
}

TEST_CASE("controlled drift on a constant state matches the phase integral") {
  // Zero dispersion contribution (constant field) and zero nonlinearity
  // leave only dY/dt = -i c1(t) gtilde(|Y|^2) Y.
  auto g = SpectralGrid::make(1, 16, 5.0);
  const cplx c0(0.9, 0.4);
  auto u0 = ComplexField::constant(g, c0);
  auto spec = NonlinearitySpec::make(0.0, 1.0, 1);
  auto fam = sat1();
  auto nu = LevyMeasure::discrete_scalar({0.6, -0.2}, {1.0, 0.5});  // drift moment 0.5
  SolverConfig cfg;
  cfg.dt = 1e-3;

  Control psi({0.0, 0.5, 1.0}, 1, {3.0, 0.5});
  auto traj = solve_skeleton(u0, psi, nu, fam, spec, 1.0, cfg);
  // c1(t) = (psi - 1) * 0.5, integral over [0,1] = (2*0.5 - 0.5*0.5)*0.5.
  const double integral = 0.5 * (2.0 * 0.5 + (-0.5) * 0.5);
  const double angle = -fam.gtilde(0, std::norm(c0)) * integral;
  const cplx want = std::exp(cplx(0.0, angle)) * c0;
  CHECK(terminal_error(traj.terminal(), ComplexField::constant(g, want)) < 1e-12);

  // Doubling psi - 1 doubles the accumulated angle.
  Control psi2({0.0, 0.5, 1.0}, 1, {5.0, 0.0});
  auto traj2 = solve_skeleton(u0, psi2, nu, fam, spec, 1.0, cfg);
  const cplx want2 = std::exp(cplx(0.0, 2.0 * angle)) * c0;
  CHECK(terminal_error(traj2.terminal(), ComplexField::constant(g, want2)) < 1e-12);
}

TEST_CASE("empty jump record reduces to the deterministic equation") {
  auto g = grid1d();
  auto u0 = gaussian(g, 0.5, 3.0);
  auto spec = cubic(1.0);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  auto plain = solve_nls(u0, spec, 0.2, cfg);
  auto driven = solve_jump_driven(u0, 0.1, {}, symmetric4(), sat1(), spec, 0.2, cfg);
  CHECK(terminal_error(driven.terminal(), plain.terminal()) <= 1e-15);
}

TEST_CASE("isolated jumps rotate a constant state by the exact flow angle") {
  auto g = SpectralGrid::make(1, 16, 5.0);
  const cplx c0(0.7, -0.2);
  auto u0 = ComplexField::constant(g, c0);
  auto spec = NonlinearitySpec::make(0.0, 1.0, 1);
  auto fam = sat1();
  auto nu = symmetric4();  // zero drift moment
  SolverConfig cfg;
  cfg.dt = 1e-3;
  const double eps = 0.2;

  std::vector<JumpEvent> jumps;
  jumps.push_back({0.3704, {0.75}, 2});   // interior of a step
  jumps.push_back({0.5, {-0.25}, 1});     // exactly on a step boundary
  auto traj = solve_jump_driven(u0, eps, jumps, nu, fam, spec, 1.0, cfg);
  const double th = std::norm(c0);
  const double angle = -eps * (0.75 + -0.25) * fam.gtilde(0, th);
  const cplx want = std::exp(cplx(0.0, angle)) * c0;
  CHECK(terminal_error(traj.terminal(), ComplexField::constant(g, want)) < 1e-12);
  CHECK(traj.jumps.size() == 2);
}

TEST_CASE("stochastic runs replay bit for bit under one seed") {
  auto g = grid1d();
  auto u0 = gaussian(g, 0.5, 3.0);
  auto spec = cubic(1.0);
  auto fam = sat1();
  auto nu = symmetric4();
  SolverConfig cfg;
  cfg.dt = 1e-3;
  Rng a(42), b(42), c(43);
  auto ta = solve_stochastic(u0, 0.1, nu, fam, spec, 0.5, a, cfg);
  auto tb = solve_stochastic(u0, 0.1, nu, fam, spec, 0.5, b, cfg);
  auto tc = solve_stochastic(u0, 0.1, nu, fam, spec, 0.5, c, cfg);
  REQUIRE(ta.jumps.size() == tb.jumps.size());
  for (std::size_t i = 0; i < ta.jumps.size(); ++i)
    CHECK(ta.jumps[i].time == tb.jumps[i].time);
  CHECK(terminal_error(ta.terminal(), tb.terminal()) == 0.0);
  CHECK(terminal_error(ta.terminal(), tc.terminal()) > 0.0);
}

TEST_CASE("unit tilt controlled run equals the stochastic run seed for seed") {
  auto g = grid1d();
  auto u0 = gaussian(g, 0.5, 3.0);
  auto spec = cubic(1.0);
  auto fam = sat1();
  auto nu = symmetric4();
  SolverConfig cfg;
  cfg.dt = 1e-3;
  Rng a(7), b(7);
  auto plain = solve_stochastic(u0, 0.1, nu, fam, spec, 0.5, a, cfg);
  auto tilted = solve_controlled(u0, 0.1, Control::constant(1.0, 0.5, 5, 4), nu, fam,
                                 spec, 0.5, b, cfg);
  REQUIRE(plain.jumps.size() == tilted.jumps.size());
  CHECK(terminal_error(plain.terminal(), tilted.terminal()) == 0.0);
}

TEST_CASE("stability guard aborts a run that exceeds the threshold") {
  auto g = SpectralGrid::make(1, 32, 10.0);
  auto u0 = ComplexField::constant(g, cplx(1.0, 0.0));
  auto spec = cubic(1.0);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.blowup_guard = 0.4;
  CHECK_THROWS_AS(solve_nls(u0, spec, 0.1, cfg), BlowupError);
  cfg.blowup_guard = 1e6;
  auto traj = solve_nls(u0, spec, 0.1, cfg);
  CHECK(traj.stability_number == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("step and grid misalignment is rejected") {
  auto g = SpectralGrid::make(1, 32, 10.0);
  auto u0 = ComplexField::constant(g, cplx(0.5, 0.0));
  auto spec = cubic(1.0);
  SolverConfig cfg;
  cfg.dt = 3e-4;
  CHECK_THROWS_AS(solve_nls(u0, spec, 1.0, cfg), std::invalid_argument);
  cfg.dt = 1e-3;
  Control misaligned({0.0, 0.25001, 1.0}, 1, {2.0, 1.0});
  CHECK_THROWS_AS(solve_skeleton(u0, misaligned, symmetric4(), sat1(), spec, 1.0, cfg),
                  std::invalid_argument);
  Control short_grid({0.0, 0.5}, 1, {2.0});
  CHECK_THROWS_AS(solve_skeleton(u0, short_grid, symmetric4(), sat1(), spec, 1.0, cfg),
                  std::invalid_argument);
}

TEST_CASE("snapshot grid follows the stride and the norm log is dense") {
  auto g = SpectralGrid::make(1, 32, 10.0);
  auto u0 = ComplexField::constant(g, cplx(0.5, 0.0));
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.snapshot_stride = 100;
  auto traj = solve_nls(u0, cubic(1.0), 1.0, cfg);
  REQUIRE(traj.times.size() == 11);
  for (int i = 0; i < 11; ++i)
    CHECK(traj.times[i] == doctest::Approx(0.1 * i).epsilon(1e-12));
  CHECK(traj.norm_series.size() == 1001);
  CHECK(traj.norm_series.front().time == 0.0);
  CHECK(traj.norm_series.back().time == doctest::Approx(1.0));
}

TEST_CASE("regularized solver conserves the smoothed initial norm") {
  auto g = grid1d();
  auto u0 = gaussian(g, 0.5, 3.0);
  auto spec = cubic(1.0);
  auto fam = sat1();
  auto nu = symmetric4();
  SolverConfig cfg;
  cfg.dt = 1e-3;
  Control psi = Control::constant(2.0, 0.5, 4, 4);
  psi.value(1, 0) = 0.5;
  psi.value(2, 2) = 3.0;
  const double mu = 50.0;
  auto traj = solve_skeleton_yosida(u0, psi, mu, nu, fam, spec, 0.5, cfg);
  const double want = l2_norm(yosida_apply(u0, mu));
  CHECK(traj.norm_series.front().l2 == doctest::Approx(want).epsilon(1e-12));
  for (const auto& s : traj.norm_series)
    CHECK(std::abs(s.l2 - want) / want < 1e-8);
}

TEST_CASE("regularized solver approaches the unregularized skeleton") {
  auto g = grid1d();
  auto u0 = gaussian(g, 0.5, 3.0);
  auto spec = cubic(1.0);
  auto fam = sat1();
  auto nu = LevyMeasure::discrete_scalar({0.6, -0.2}, {1.0, 0.5});
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.snapshot_stride = 25;
  const double T = 0.25;
  Control psi({0.0, 0.125, 0.25}, 1, {2.5, 0.25});
  auto skel = solve_skeleton(u0, psi, nu, fam, spec, T, cfg);
  double prev = 1e9;
  for (double mu : {10.0, 100.0, 10000.0}) {
    auto reg = solve_skeleton_yosida(u0, psi, mu, nu, fam, spec, T, cfg);
    const double d = enorm_distance(reg, skel, spec.lebesgue_p(), spec.lebesgue_r()).total();
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 2e-3);
}

TEST_CASE("regularized solver norm drift shrinks at least quadratically in dt") {
  auto g = SpectralGrid::make(1, 64, 40.0);
  auto u0 = gaussian(g, 0.5, 3.0);
  auto spec = cubic(1.0);
  auto fam = sat1();
  auto nu = LevyMeasure::discrete_scalar({0.6, -0.2}, {1.0, 0.5});
  Control psi = Control::constant(2.0, 0.2, 1, 1);
  auto drift_at = [&](double dt) {
    SolverConfig cfg;
    cfg.dt = dt;
    cfg.yosida_substeps = 1;
    auto traj = solve_skeleton_yosida(u0, psi, 20.0, nu, fam, spec, 0.2, cfg);
    const double n0 = traj.norm_series.front().l2;
    double m = 0.0;
    for (const auto& s : traj.norm_series) m = std::max(m, std::abs(s.l2 - n0));
    return m;
  };
  const double d1 = drift_at(2e-2);
  const double d2 = drift_at(1e-2);
  CHECK(d1 / d2 >= 3.0);
}

TEST_CASE("two-dimensional runs propagate plane waves and conserve the norm") {
  auto g = SpectralGrid::make(2, 32, 8.0);
  const double k1 = 2.0 * M_PI / 8.0 * 2, k2 = 2.0 * M_PI / 8.0 * 1;
  const double A = 0.6;
  auto u0 = ComplexField::from_function(g, [&](double x, double y) {
    return A * std::exp(cplx(0.0, k1 * x + k2 * y));
  });
  auto spec = NonlinearitySpec::make(1.0, 0.5, 2);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  const double T = 0.1;
  auto traj = solve_nls(u0, spec, T, cfg);
  const double omega = -(k1 * k1 + k2 * k2 + spec.lambda * std::pow(A * A, 0.5));
  auto want = ComplexField::from_function(g, [&](double x, double y) {
    return A * std::exp(cplx(0.0, k1 * x + k2 * y + omega * T));
  });
  CHECK(terminal_error(traj.terminal(), want) < 1e-10);
  CHECK(max_l2_drift(traj) < 1e-11);
}

TEST_CASE("dealiased runs stay close to the plain scheme on smooth data") {
  auto g = grid1d();
  auto u0 = gaussian(g, 0.5, 3.0);
  auto spec = cubic(1.0);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  auto plain = solve_nls(u0, spec, 0.2, cfg);
  cfg.dealias = true;
  auto filtered = solve_nls(u0, spec, 0.2, cfg);
  CHECK(terminal_error(filtered.terminal(), plain.terminal()) < 1e-10);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "snls/trajectory.hpp"

using namespace snls;

namespace {

const double inf = std::numeric_limits<double>::infinity();

Trajectory uniform_trajectory(std::shared_ptr<const SpectralGrid> g, int snapshots,
                              double T, const std::function<cplx(double)>& amp) {
  Trajectory traj;
  for (int i = 0; i < snapshots; ++i) {
    const double t = T * i / (snapshots - 1);
    traj.times.push_back(t);
    traj.states.push_back(ComplexField::constant(g, amp(t)));
  }
  return traj;
}

}  // namespace

TEST_CASE("mixed norm of a constant-in-time constant field (closed form)") {
  const double L = 40.0, T = 1.0, c = 2.0;
  auto g = SpectralGrid::make(1, 64, L);
  auto traj = uniform_trajectory(g, 11, T, [&](double) { return cplx(c, 0.0); });
  auto rep = mixed_norm(traj, 8.0, 4.0);
  CHECK(rep.sup_l2 == doctest::Approx(c * std::sqrt(L)).epsilon(1e-13));
  CHECK(rep.time_lr ==
        doctest::Approx(c * std::pow(L, 0.25) * std::pow(T, 1.0 / 8.0)).epsilon(1e-13));
  CHECK(rep.total() == doctest::Approx(rep.sup_l2 + rep.time_lr));
  CHECK(rep.max_gap == doctest::Approx(0.1));
}

TEST_CASE("single nonzero snapshot dominates the sup component") {
  auto g = SpectralGrid::make(1, 32, 10.0);
  auto traj = uniform_trajectory(g, 5, 1.0, [](double) { return cplx(0.0, 0.0); });
  traj.states[2] = ComplexField::constant(g, cplx(3.0, 0.0));
  auto rep = mixed_norm(traj, 8.0, 4.0);
  CHECK(rep.sup_l2 == doctest::Approx(3.0 * std::sqrt(10.0)).epsilon(1e-13));
  // Only the one interval starting at the nonzero snapshot contributes.
  const double lr = 3.0 * std::pow(10.0, 0.25);
  CHECK(rep.time_lr == doctest::Approx(std::pow(0.25 * std::pow(lr, 8.0), 1.0 / 8.0)));
}

TEST_CASE("left-endpoint quadrature converges at first order for a smooth decay") {
  const double T = 1.0, p = 8.0;
  auto g = SpectralGrid::make(1, 32, 10.0);
  const double lr0 = std::pow(10.0, 0.25);  // constant-one field in L^4
  const double exact = std::pow((1.0 - std::exp(-p * T)) / p, 1.0 / p) * lr0;
  auto error_at = [&](int snaps) {
    auto traj = uniform_trajectory(g, snaps, T,
                                   [](double t) { return cplx(std::exp(-t), 0.0); });
    return std::abs(mixed_norm(traj, p, 4.0).time_lr - exact);
  };
  const double e1 = error_at(101);
  const double e2 = error_at(201);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.06));
}

TEST_CASE("infinite time exponent takes the running maximum") {
  auto g = SpectralGrid::make(1, 32, 10.0);
  auto traj = uniform_trajectory(g, 9, 2.0, [](double t) { return cplx(1.0 + t, 0.0); });
  auto rep = mixed_norm(traj, inf, 2.0);
  CHECK(rep.time_lr == doctest::Approx(3.0 * std::sqrt(10.0)).epsilon(1e-13));
  CHECK(rep.sup_l2 == doctest::Approx(3.0 * std::sqrt(10.0)).epsilon(1e-13));
}

TEST_CASE("mixed norm validates its inputs") {
  auto g = SpectralGrid::make(1, 32, 10.0);
  auto traj = uniform_trajectory(g, 5, 1.0, [](double) { return cplx(1.0, 0.0); });
  CHECK_THROWS_AS(mixed_norm(traj, 8.0, 5.0), std::invalid_argument);  // not admissible
  Trajectory one;
  one.times = {0.0};
  one.states = {ComplexField::constant(g, 1.0)};
  CHECK_THROWS_AS(mixed_norm(one, 8.0, 4.0), std::invalid_argument);
  auto bad = traj;
  bad.times[2] = bad.times[1];
  CHECK_THROWS_AS(mixed_norm(bad, 8.0, 4.0), std::invalid_argument);
  auto fourier = traj;
  to_fourier(fourier.states[1]);
  CHECK_THROWS_AS(mixed_norm(fourier, 8.0, 4.0), std::invalid_argument);
}

TEST_CASE("distance between runs reduces to the norm of the difference") {
  auto g = SpectralGrid::make(1, 64, 40.0);
  auto a = uniform_trajectory(g, 11, 1.0, [](double t) { return cplx(std::cos(t), t); });
  auto b = a;
  CHECK(enorm_distance(a, a, 8.0, 4.0).total() == 0.0);
  // Shift every snapshot by the same constant: distance equals the norm of
  // that constant trajectory.
  for (auto& s : b.states)
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += cplx(0.5, 0.0);
  auto rep = enorm_distance(a, b, 8.0, 4.0);
  CHECK(rep.sup_l2 == doctest::Approx(0.5 * std::sqrt(40.0)).epsilon(1e-12));
  CHECK(rep.time_lr ==
        doctest::Approx(0.5 * std::pow(40.0, 0.25)).epsilon(1e-12));

  auto c = uniform_trajectory(g, 12, 1.0, [](double) { return cplx(0.0, 0.0); });
  CHECK_THROWS_AS(enorm_distance(a, c, 8.0, 4.0), std::invalid_argument);
  auto shifted = a;
  shifted.times[3] += 1e-6;
  CHECK_THROWS_AS(enorm_distance(a, shifted, 8.0, 4.0), std::invalid_argument);
  auto other_grid = uniform_trajectory(SpectralGrid::make(1, 64, 40.0), 11, 1.0,
                                       [](double) { return cplx(1.0, 0.0); });
  CHECK_THROWS_AS(enorm_distance(a, other_grid, 8.0, 4.0), std::invalid_argument);
}

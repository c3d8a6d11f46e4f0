#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "snls/rng.hpp"

namespace snls::wz {

// Finite-dimensional harness for the canonical (Marcus) jump prescription:
// exact jump-flow solutions, piecewise-linear interpolation of the driving
// path, and coordinate-change invariance. Everything here is small and dense,
// sized for hand-built fixtures rather than spectral fields.

using Vec = std::vector<double>;

struct Mat {
  int n = 0;
  std::vector<double> a;  // row-major n*n
  Mat() = default;
  explicit Mat(int size) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
  static Mat identity(int size);
};

Vec matvec(const Mat& m, const Vec& x);
Mat matmul(const Mat& lhs, const Mat& rhs);
Mat add(const Mat& lhs, const Mat& rhs);
Mat scale(const Mat& m, double factor);
double inf_norm(const Mat& m);
Mat expm(const Mat& m);            // scaling and squaring, Taylor core
Vec solve_linear(Mat m, Vec rhs);  // partial-pivot elimination
Mat invert(const Mat& m);

struct NoiseEvent {
  double time = 0.0;
  Vec mark;  // one entry per noise channel
};

// Compensated pure-jump driving path L(t) = sum_{time <= t} mark - drift * t.
struct NoisePath {
  std::vector<NoiseEvent> events;  // strictly increasing times in (0, horizon]
  Vec drift;                       // compensator rate, one entry per channel
  double horizon = 0.0;
  int channels() const { return static_cast<int>(drift.size()); }
  Vec value_at(double t) const;
};

// Jump times from a unit-rate-per-weight atomic intensity; drift set to the
// first moment so the path is compensated.
NoisePath sample_noise_path(const std::vector<Vec>& atoms, const Vec& weights,
                            double horizon, Rng& rng);

using Field = std::function<Vec(const Vec&)>;

struct FiniteSDE {
  int dim = 0;
  std::vector<Field> fields;  // b_j, one per noise channel
  Vec x0;
  static FiniteSDE linear(const std::vector<Mat>& mats, Vec x0);
};

struct StatePath {
  std::vector<double> times;
  std::vector<Vec> states;
  const Vec& terminal() const { return states.back(); }
};

// Time-1 solution of y' = sum_j b_j(y) z_j, the canonical jump map.
Vec jump_flow(const FiniteSDE& sde, const Vec& state, const Vec& mark,
              int substeps = 64);

// Between events the state follows the compensator drift -sum_j drift_j b_j;
// each event applies jump_flow. Sampled at stride points and event times.
StatePath marcus_sde_solve(const FiniteSDE& sde, const NoisePath& path,
                           int stride_count = 32, int flow_substeps = 64);

// Linear interpolation of L on a mesh, then x' = sum_j b_j(x) dL^n_j/dt with
// a 4-stage method at step h/16. The mesh is uniform by default; optionally
// event times are inserted as extra nodes.
StatePath piecewise_linear_ode_solve(const FiniteSDE& sde, const NoisePath& path,
                                     int mesh_cells, bool refine_jump_times = false);

struct Diffeomorphism {
  std::function<Vec(const Vec&)> forward;
  std::function<Vec(const Vec&)> inverse;
  std::function<Mat(const Vec&)> jacobian;  // derivative at a domain point
  static Diffeomorphism identity_map();
  static Diffeomorphism linear_map(const Mat& m);
  static Diffeomorphism componentwise_cubic();  // y_i = x_i + x_i^3
};

// Solves the transformed equation with fields phi'(phi^{-1}(y)) b_j(phi^{-1}(y))
// and returns the sup over shared sample times of |phi(X(t)) - Y(t)|.
double change_of_coordinates_check(const FiniteSDE& sde, const Diffeomorphism& phi,
                                   const NoisePath& path, int stride_count = 32,
                                   int flow_substeps = 64);

// Exact linear solution: expm drift segments with either the exponential jump
// map expm(sum A_j z_j) or the first-order map I + sum A_j z_j.
Vec linear_closed_form(const std::vector<Mat>& mats, const Vec& x0,
                       const NoisePath& path, bool first_order_jumps);

struct MeshErrorRow {
  int mesh_cells = 0;
  double terminal_error = 0.0;    // vs marcus_sde_solve
  double exp_map_distance = 0.0;  // vs exponential-jump closed form
  double ito_map_distance = 0.0;  // vs first-order-jump closed form
};

std::vector<MeshErrorRow> mesh_refinement_table(const std::vector<Mat>& mats,
                                                const Vec& x0, const NoisePath& path,
                                                const std::vector<int>& meshes,
                                                bool refine_jump_times = false);

struct WzAggregateRow {
  int mesh_cells = 0;
  double mean_error = 0.0;
  double max_error = 0.0;
};

// Terminal PL-vs-canonical error over freshly sampled noise paths.
std::vector<WzAggregateRow> wong_zakai_experiment(
    const FiniteSDE& sde, const std::vector<Vec>& atoms, const Vec& weights,
    double horizon, const std::vector<int>& meshes, int paths, std::uint64_t seed,
    bool refine_jump_times = false, int workers = 1);

}  // namespace snls::wz

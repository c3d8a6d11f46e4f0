#include "snls/wong_zakai.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "snls/parallel.hpp"

namespace snls::wz {

Mat Mat::identity(int size) {
  Mat m(size);
  for (int i = 0; i < size; ++i) m.at(i, i) = 1.0;
  return m;
}

Vec matvec(const Mat& m, const Vec& x) {
  if (static_cast<int>(x.size()) != m.n) throw std::invalid_argument("matrix/vector size mismatch");
  Vec out(m.n, 0.0);
  for (int i = 0; i < m.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.n; ++j) s += m.at(i, j) * x[j];
    out[i] = s;
  }
  return out;
}

Mat matmul(const Mat& lhs, const Mat& rhs) {
  if (lhs.n != rhs.n) throw std::invalid_argument("matrix size mismatch");
  Mat out(lhs.n);
  for (int i = 0; i < lhs.n; ++i)
    for (int k = 0; k < lhs.n; ++k) {
      const double v = lhs.at(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < lhs.n; ++j) out.at(i, j) += v * rhs.at(k, j);
    }
  return out;
}

Mat add(const Mat& lhs, const Mat& rhs) {
  if (lhs.n != rhs.n) throw std::invalid_argument("matrix size mismatch");
  Mat out = lhs;
  for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] += rhs.a[i];
  return out;
}

Mat scale(const Mat& m, double factor) {
  Mat out = m;
  for (double& v : out.a) v *= factor;
  return out;
}

double inf_norm(const Mat& m) {
  double best = 0.0;
  for (int i = 0; i < m.n; ++i) {
    double row = 0.0;
    for (int j = 0; j < m.n; ++j) row += std::abs(m.at(i, j));
    best = std::max(best, row);
  }
  return best;
}

Mat expm(const Mat& m) {
  int squarings = 0;
  double nrm = inf_norm(m);
  while (nrm > 0.25) {
    nrm *= 0.5;
    ++squarings;
  }
  Mat b = scale(m, std::ldexp(1.0, -squarings));
  Mat sum = Mat::identity(m.n);
  Mat term = Mat::identity(m.n);
  for (int k = 1; k <= 40; ++k) {
    term = scale(matmul(term, b), 1.0 / k);
    sum = add(sum, term);
    if (inf_norm(term) < 1e-18) break;
  }
  for (int i = 0; i < squarings; ++i) sum = matmul(sum, sum);
  return sum;
}

Vec solve_linear(Mat m, Vec rhs) {
  if (static_cast<int>(rhs.size()) != m.n) throw std::invalid_argument("matrix/vector size mismatch");
  const int n = m.n;
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(m.at(r, col)) > std::abs(m.at(pivot, col))) pivot = r;
    if (std::abs(m.at(pivot, col)) < 1e-300) throw std::invalid_argument("singular matrix");
    if (pivot != col) {
      for (int j = 0; j < n; ++j) std::swap(m.at(col, j), m.at(pivot, j));
      std::swap(rhs[col], rhs[pivot]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = m.at(r, col) / m.at(col, col);
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) m.at(r, j) -= f * m.at(col, j);
      rhs[r] -= f * rhs[col];
    }
  }
  Vec x(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = rhs[i];
    for (int j = i + 1; j < n; ++j) s -= m.at(i, j) * x[j];
    x[i] = s / m.at(i, i);
  }
  return x;
}

Mat invert(const Mat& m) {
  Mat out(m.n);
  for (int col = 0; col < m.n; ++col) {
    Vec e(m.n, 0.0);
    e[col] = 1.0;
    Vec x = solve_linear(m, e);
    for (int i = 0; i < m.n; ++i) out.at(i, col) = x[i];
  }
  return out;
}

Vec NoisePath::value_at(double t) const {
  Vec out(drift.size(), 0.0);
  for (const auto& ev : events) {
    if (ev.time > t) break;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += ev.mark[j];
  }
  for (std::size_t j = 0; j < out.size(); ++j) out[j] -= drift[j] * t;
  return out;
}

NoisePath sample_noise_path(const std::vector<Vec>& atoms, const Vec& weights,
                            double horizon, Rng& rng) {
  if (atoms.empty() || atoms.size() != weights.size())
    throw std::invalid_argument("atoms and weights must match and be non-empty");
  const std::size_t channels = atoms.front().size();
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].size() != channels) throw std::invalid_argument("atom dimension mismatch");
    if (!(weights[i] > 0.0)) throw std::invalid_argument("weights must be positive");
    total += weights[i];
  }
  NoisePath path;
  path.horizon = horizon;
  path.drift.assign(channels, 0.0);
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (std::size_t j = 0; j < channels; ++j) path.drift[j] += weights[i] * atoms[i][j];
  double t = rng.exponential(total);
  while (t <= horizon) {
    path.events.push_back({t, atoms[rng.weighted_index(weights, total)]});
    t += rng.exponential(total);
  }
  return path;
}

FiniteSDE FiniteSDE::linear(const std::vector<Mat>& mats, Vec x0) {
  if (mats.empty()) throw std::invalid_argument("at least one field required");
  FiniteSDE sde;
  sde.dim = mats.front().n;
  sde.x0 = std::move(x0);
  if (static_cast<int>(sde.x0.size()) != sde.dim)
    throw std::invalid_argument("initial state dimension mismatch");
  for (const auto& m : mats) {
    if (m.n != sde.dim) throw std::invalid_argument("field dimension mismatch");
    sde.fields.push_back([m](const Vec& x) { return matvec(m, x); });
  }
  return sde;
}

namespace {

Vec field_combination(const FiniteSDE& sde, const Vec& y, const Vec& coeff) {
  Vec out(sde.dim, 0.0);
  for (std::size_t j = 0; j < sde.fields.size(); ++j) {
    if (coeff[j] == 0.0) continue;
    Vec b = sde.fields[j](y);
    for (int i = 0; i < sde.dim; ++i) out[i] += coeff[j] * b[i];
  }
  return out;
}

// 4-stage integration of y' = sum_j coeff_j b_j(y) over the given duration.
Vec rk4_flow(const FiniteSDE& sde, Vec y, const Vec& coeff, double duration,
             int substeps) {
  const double h = duration / substeps;
  Vec stage(sde.dim);
  for (int s = 0; s < substeps; ++s) {
    const Vec k1 = field_combination(sde, y, coeff);
    for (int i = 0; i < sde.dim; ++i) stage[i] = y[i] + 0.5 * h * k1[i];
    const Vec k2 = field_combination(sde, stage, coeff);
    for (int i = 0; i < sde.dim; ++i) stage[i] = y[i] + 0.5 * h * k2[i];
    const Vec k3 = field_combination(sde, stage, coeff);
    for (int i = 0; i < sde.dim; ++i) stage[i] = y[i] + h * k3[i];
    const Vec k4 = field_combination(sde, stage, coeff);
    for (int i = 0; i < sde.dim; ++i) {
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(y[i])) throw std::runtime_error("flow integrator overflow");
    }
  }
  return y;
}

void validate_path(const FiniteSDE& sde, const NoisePath& path) {
  if (path.channels() != static_cast<int>(sde.fields.size()))
    throw std::invalid_argument("noise channel count does not match field count");
  if (!(path.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  double prev = 0.0;
  for (const auto& ev : path.events) {
    if (!(ev.time > prev) || ev.time > path.horizon)
      throw std::invalid_argument("event times must be increasing within the horizon");
    if (static_cast<int>(ev.mark.size()) != path.channels())
      throw std::invalid_argument("event mark dimension mismatch");
    prev = ev.time;
  }
}

Vec drift_coefficient(const NoisePath& path, double gap) {
  Vec coeff(path.drift.size());
  for (std::size_t j = 0; j < coeff.size(); ++j) coeff[j] = -gap * path.drift[j];
  return coeff;
}

// Drift segments reuse the unit-time integrator by scaling the coefficient.
Vec drift_evolve(const FiniteSDE& sde, Vec y, const NoisePath& path, double gap) {
  if (gap <= 0.0) return y;
  bool moving = false;
  for (double d : path.drift) moving = moving || d != 0.0;
  if (!moving) return y;
  const int substeps = std::max(8, static_cast<int>(std::ceil(64.0 * gap)));
  return rk4_flow(sde, std::move(y), drift_coefficient(path, gap), 1.0, substeps);
}

}  // namespace

Vec jump_flow(const FiniteSDE& sde, const Vec& state, const Vec& mark, int substeps) {
  if (mark.size() != sde.fields.size()) throw std::invalid_argument("mark dimension mismatch");
  return rk4_flow(sde, state, mark, 1.0, substeps);
}

StatePath marcus_sde_solve(const FiniteSDE& sde, const NoisePath& path,
                           int stride_count, int flow_substeps) {
  validate_path(sde, path);
  if (stride_count < 1) throw std::invalid_argument("stride_count must be positive");

  std::vector<double> marks;  // sample instants: stride points plus event times
  for (int i = 0; i <= stride_count; ++i)
    marks.push_back(path.horizon * i / stride_count);
  for (const auto& ev : path.events) marks.push_back(ev.time);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-15; }),
              marks.end());

  StatePath out;
  Vec state = sde.x0;
  double t = 0.0;
  std::size_t next_event = 0;
  for (double tm : marks) {
    state = drift_evolve(sde, std::move(state), path, tm - t);
    t = tm;
    while (next_event < path.events.size() &&
           std::abs(path.events[next_event].time - tm) < 1e-15) {
      state = jump_flow(sde, state, path.events[next_event].mark, flow_substeps);
      ++next_event;
    }
    out.times.push_back(tm);
    out.states.push_back(state);
  }
  return out;
}

StatePath piecewise_linear_ode_solve(const FiniteSDE& sde, const NoisePath& path,
                                     int mesh_cells, bool refine_jump_times) {
  validate_path(sde, path);
  if (mesh_cells < 1) throw std::invalid_argument("mesh_cells must be positive");

  std::vector<double> nodes;
  for (int i = 0; i <= mesh_cells; ++i) nodes.push_back(path.horizon * i / mesh_cells);
  if (refine_jump_times) {
    for (const auto& ev : path.events) nodes.push_back(ev.time);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                nodes.end());
  }

  StatePath out;
  Vec state = sde.x0;
  out.times.push_back(nodes.front());
  out.states.push_back(state);
  Vec prev_l = path.value_at(nodes.front());
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double width = nodes[i] - nodes[i - 1];
    Vec next_l = path.value_at(nodes[i]);
    Vec slope(next_l.size());
    for (std::size_t j = 0; j < slope.size(); ++j)
      slope[j] = (next_l[j] - prev_l[j]) / width;
    state = rk4_flow(sde, std::move(state), slope, width, 16);
    out.times.push_back(nodes[i]);
    out.states.push_back(state);
    prev_l = std::move(next_l);
  }
  return out;
}

Diffeomorphism Diffeomorphism::identity_map() {
  Diffeomorphism phi;
  phi.forward = [](const Vec& x) { return x; };
  phi.inverse = [](const Vec& y) { return y; };
  phi.jacobian = [](const Vec& x) { return Mat::identity(static_cast<int>(x.size())); };
  return phi;
}

Diffeomorphism Diffeomorphism::linear_map(const Mat& m) {
  const Mat inv = invert(m);
  Diffeomorphism phi;
  phi.forward = [m](const Vec& x) { return matvec(m, x); };
  phi.inverse = [inv](const Vec& y) { return matvec(inv, y); };
  phi.jacobian = [m](const Vec&) { return m; };
  return phi;
}

Diffeomorphism Diffeomorphism::componentwise_cubic() {
  Diffeomorphism phi;
  phi.forward = [](const Vec& x) {
    Vec y = x;
    for (double& v : y) v += v * v * v;
    return y;
  };
  phi.inverse = [](const Vec& y) {
    Vec x(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      double t = std::abs(y[i]) < 1.5 ? y[i] : std::cbrt(y[i]);
      bool done = false;
      for (int it = 0; it < 80; ++it) {
        const double f = t + t * t * t - y[i];
        if (std::abs(f) < 1e-14 * std::max(1.0, std::abs(y[i]))) {
          done = true;
          break;
        }
        t -= f / (1.0 + 3.0 * t * t);
      }
      if (!done) throw std::runtime_error("cubic inverse root solve failed");
      x[i] = t;
    }
    return x;
  };
  phi.jacobian = [](const Vec& x) {
    Mat j(static_cast<int>(x.size()));
    for (int i = 0; i < j.n; ++i) j.at(i, i) = 1.0 + 3.0 * x[i] * x[i];
    return j;
  };
  return phi;
}

double change_of_coordinates_check(const FiniteSDE& sde, const Diffeomorphism& phi,
                                   const NoisePath& path, int stride_count,
                                   int flow_substeps) {
  FiniteSDE pushed;
  pushed.dim = sde.dim;
  pushed.x0 = phi.forward(sde.x0);
  for (const auto& field : sde.fields)
    pushed.fields.push_back([&phi, field](const Vec& y) {
      const Vec x = phi.inverse(y);
      return matvec(phi.jacobian(x), field(x));
    });

  const StatePath direct = marcus_sde_solve(sde, path, stride_count, flow_substeps);
  const StatePath transformed = marcus_sde_solve(pushed, path, stride_count, flow_substeps);
  double worst = 0.0;
  for (std::size_t i = 0; i < direct.states.size(); ++i) {
    const Vec mapped = phi.forward(direct.states[i]);
    double dist = 0.0;
    for (int c = 0; c < sde.dim; ++c) {
      const double d = mapped[c] - transformed.states[i][c];
      dist += d * d;
    }
    worst = std::max(worst, std::sqrt(dist));
  }
  return worst;
}

Vec linear_closed_form(const std::vector<Mat>& mats, const Vec& x0,
                       const NoisePath& path, bool first_order_jumps) {
  if (mats.empty() || static_cast<int>(path.drift.size()) != static_cast<int>(mats.size()))
    throw std::invalid_argument("field/channel mismatch");
  const int dim = mats.front().n;
  Mat generator(dim);
  for (std::size_t j = 0; j < mats.size(); ++j)
    generator = add(generator, scale(mats[j], -path.drift[j]));
  Vec state = x0;
  double t = 0.0;
  for (const auto& ev : path.events) {
    if (ev.time > t) state = matvec(expm(scale(generator, ev.time - t)), state);
    t = ev.time;
    Mat jump(dim);
    for (std::size_t j = 0; j < mats.size(); ++j)
      jump = add(jump, scale(mats[j], ev.mark[j]));
    state = matvec(first_order_jumps ? add(Mat::identity(dim), jump) : expm(jump), state);
  }
  if (path.horizon > t) state = matvec(expm(scale(generator, path.horizon - t)), state);
  return state;
}

std::vector<MeshErrorRow> mesh_refinement_table(const std::vector<Mat>& mats,
                                                const Vec& x0, const NoisePath& path,
                                                const std::vector<int>& meshes,
                                                bool refine_jump_times) {
  const FiniteSDE sde = FiniteSDE::linear(mats, x0);
  const Vec reference = marcus_sde_solve(sde, path).terminal();
  const Vec exp_map = linear_closed_form(mats, x0, path, false);
  const Vec ito_map = linear_closed_form(mats, x0, path, true);
  auto dist = [](const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  };
  std::vector<MeshErrorRow> rows;
  for (int cells : meshes) {
    const Vec pl = piecewise_linear_ode_solve(sde, path, cells, refine_jump_times).terminal();
    rows.push_back({cells, dist(pl, reference), dist(pl, exp_map), dist(pl, ito_map)});
  }
  return rows;
}

std::vector<WzAggregateRow> wong_zakai_experiment(
    const FiniteSDE& sde, const std::vector<Vec>& atoms, const Vec& weights,
    double horizon, const std::vector<int>& meshes, int paths, std::uint64_t seed,
    bool refine_jump_times, int workers) {
  if (paths < 1) throw std::invalid_argument("need at least one path");
  std::vector<std::vector<double>> errors(
      paths, std::vector<double>(meshes.size(), 0.0));
  parallel_for(paths, workers, [&](int p) {
    Rng rng(derive_stream_seed(seed, static_cast<std::uint64_t>(p)));
    const NoisePath path = sample_noise_path(atoms, weights, horizon, rng);
    const Vec reference = marcus_sde_solve(sde, path).terminal();
    for (std::size_t m = 0; m < meshes.size(); ++m) {
      const Vec pl =
          piecewise_linear_ode_solve(sde, path, meshes[m], refine_jump_times).terminal();
      double s = 0.0;
      for (std::size_t i = 0; i < pl.size(); ++i)
        s += (pl[i] - reference[i]) * (pl[i] - reference[i]);
      errors[p][m] = std::sqrt(s);
    }
  });
  std::vector<WzAggregateRow> rows;
  for (std::size_t m = 0; m < meshes.size(); ++m) {
    WzAggregateRow row;
    row.mesh_cells = meshes[m];
    for (int p = 0; p < paths; ++p) {
      row.mean_error += errors[p][m];
      row.max_error = std::max(row.max_error, errors[p][m]);
    }
    row.mean_error /= paths;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace snls::wz

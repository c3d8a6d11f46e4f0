#include "snls/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>

namespace snls {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW plan creation is not thread safe; execution through the new-array
// interface is.  Plans are cached per (dim, n, sign) and reused for every
// field on a matching grid.
class PlanCache {
public:
  fftw_plan get(int dim, int n, int sign) {
    std::scoped_lock lock(mutex_);
    const auto key = std::make_tuple(dim, n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    const std::size_t total = dim == 1 ? static_cast<std::size_t>(n)
                                       : static_cast<std::size_t>(n) * n;
    fftw_complex* buf = fftw_alloc_complex(total);
    fftw_plan p = dim == 1
        ? fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED)
        : fftw_plan_dft_2d(n, n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    plans_[key] = p;
    return p;
  }

private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute(fftw_plan plan, cplx* data) {
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                   reinterpret_cast<fftw_complex*>(data));
}

}  // namespace

std::shared_ptr<const SpectralGrid> SpectralGrid::make(int dim, int n, double length) {
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("grid dimension must be 1 or 2");
  if (!is_power_of_two(n) || n < 4)
    throw std::invalid_argument("grid points per axis must be a power of two, at least 4");
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("grid length must be positive and finite");

  auto g = std::shared_ptr<SpectralGrid>(new SpectralGrid());
  g->dim_ = dim;
  g->n_ = n;
  g->length_ = length;
  g->size_ = dim == 1 ? static_cast<std::size_t>(n)
                      : static_cast<std::size_t>(n) * n;
  const double h = length / n;
  g->cell_volume_ = dim == 1 ? h : h * h;
  g->volume_ = dim == 1 ? length : length * length;

  g->axis_k_.resize(n);
  g->axis_x_.resize(n);
  const double dk = 2.0 * M_PI / length;
  for (int i = 0; i < n; ++i) {
    const int freq = i < n / 2 ? i : i - n;
    g->axis_k_[i] = dk * freq;
    g->axis_x_[i] = -0.5 * length + h * i;
  }

  g->k_squared_.resize(g->size_);
  if (dim == 1) {
    for (int i = 0; i < n; ++i) g->k_squared_[i] = g->axis_k_[i] * g->axis_k_[i];
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        g->k_squared_[static_cast<std::size_t>(i) * n + j] =
            g->axis_k_[i] * g->axis_k_[i] + g->axis_k_[j] * g->axis_k_[j];
  }
  return g;
}

int SpectralGrid::axis_frequency(std::size_t flat, int axis) const {
  int idx;
  if (dim_ == 1) {
    idx = static_cast<int>(flat);
  } else {
    idx = axis == 0 ? static_cast<int>(flat / n_) : static_cast<int>(flat % n_);
  }
  return idx < n_ / 2 ? idx : idx - n_;
}

ComplexField::ComplexField(std::shared_ptr<const SpectralGrid> grid, Rep rep)
    : grid_(std::move(grid)), rep_(rep) {
  if (!grid_) throw std::invalid_argument("field requires a grid");
  data_.resize(grid_->size());
}

ComplexField ComplexField::from_function(std::shared_ptr<const SpectralGrid> grid,
                                         const std::function<cplx(double)>& f) {
  if (grid->dim() != 1)
    throw std::invalid_argument("one-argument initializer requires a 1d grid");
  ComplexField out(grid, Rep::Physical);
  const auto& x = grid->axis_coordinates();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i]);
  return out;
}

ComplexField ComplexField::from_function(std::shared_ptr<const SpectralGrid> grid,
                                         const std::function<cplx(double, double)>& f) {
  if (grid->dim() != 2)
    throw std::invalid_argument("two-argument initializer requires a 2d grid");
  ComplexField out(grid, Rep::Physical);
  const auto& x = grid->axis_coordinates();
  const int n = grid->points_per_axis();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(i) * n + j] = f(x[i], x[j]);
  return out;
}

ComplexField ComplexField::constant(std::shared_ptr<const SpectralGrid> grid, cplx value) {
  ComplexField out(std::move(grid), Rep::Physical);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = value;
  return out;
}

void to_fourier(ComplexField& f) {
  if (f.rep() == Rep::Fourier)
    throw std::invalid_argument("field is already in Fourier representation");
  const auto& g = f.grid();
  fftw_plan plan = plan_cache().get(g.dim(), g.points_per_axis(), FFTW_FORWARD);
  execute(plan, f.data());
  const double scale = 1.0 / static_cast<double>(g.size());
  for (auto& v : f.values()) v *= scale;
  f.set_rep(Rep::Fourier);
}

void to_physical(ComplexField& f) {
  if (f.rep() == Rep::Physical)
    throw std::invalid_argument("field is already in physical representation");
  const auto& g = f.grid();
  fftw_plan plan = plan_cache().get(g.dim(), g.points_per_axis(), FFTW_BACKWARD);
  execute(plan, f.data());
  f.set_rep(Rep::Physical);
}

ComplexField forward_transform(const ComplexField& physical) {
  ComplexField out = physical;
  to_fourier(out);
  return out;
}

ComplexField inverse_transform(const ComplexField& fourier) {
  ComplexField out = fourier;
  to_physical(out);
  return out;
}

void free_propagate_in_place(ComplexField& f, double dt) {
  if (!std::isfinite(dt))
    throw std::invalid_argument("propagation time must be finite");
  const bool was_physical = f.rep() == Rep::Physical;
  if (was_physical) to_fourier(f);
  const auto& k2 = f.grid().k_squared();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double phase = -k2[i] * dt;
    f[i] *= cplx(std::cos(phase), std::sin(phase));
  }
  if (was_physical) to_physical(f);
}

ComplexField free_propagate(const ComplexField& f, double dt) {
  ComplexField out = f;
  free_propagate_in_place(out, dt);
  return out;
}

void yosida_apply_in_place(ComplexField& f, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("yosida parameter must be positive and finite");
  const bool was_physical = f.rep() == Rep::Physical;
  if (was_physical) to_fourier(f);
  const auto& k2 = f.grid().k_squared();
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= mu / (mu + k2[i]);
  if (was_physical) to_physical(f);
}

ComplexField yosida_apply(const ComplexField& f, double mu) {
  ComplexField out = f;
  yosida_apply_in_place(out, mu);
  return out;
}

void dealias_in_place(ComplexField& f) {
  const bool was_physical = f.rep() == Rep::Physical;
  if (was_physical) to_fourier(f);
  const auto& g = f.grid();
  const int cutoff = g.points_per_axis() / 3;
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (int axis = 0; axis < g.dim(); ++axis) {
      if (std::abs(g.axis_frequency(i, axis)) > cutoff) {
        f[i] = 0.0;
        break;
      }
    }
  }
  if (was_physical) to_physical(f);
}

double l2_norm(const ComplexField& f) {
  double s = 0.0;
  for (const auto& v : f.values()) s += std::norm(v);
  const double w = f.rep() == Rep::Physical ? f.grid().cell_volume() : f.grid().volume();
  return std::sqrt(w * s);
}

double lr_norm(const ComplexField& f, double r) {
  if (f.rep() != Rep::Physical)
    throw std::invalid_argument("lebesgue norm requires physical representation");
  if (std::isinf(r)) {
    double m = 0.0;
    for (const auto& v : f.values()) m = std::max(m, std::abs(v));
    return m;
  }
  if (!(r >= 1.0))
    throw std::invalid_argument("lebesgue exponent must be at least 1");
  if (r == 2.0) return l2_norm(f);
  double s = 0.0;
  for (const auto& v : f.values()) s += std::pow(std::abs(v), r);
  return std::pow(f.grid().cell_volume() * s, 1.0 / r);
}

cplx inner_product(const ComplexField& a, const ComplexField& b) {
  if (a.grid_ptr() != b.grid_ptr())
    throw std::invalid_argument("inner product requires a shared grid");
  if (a.rep() != b.rep())
    throw std::invalid_argument("inner product requires matching representations");
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  const double w = a.rep() == Rep::Physical ? a.grid().cell_volume() : a.grid().volume();
  return w * s;
}

bool admissible_pair_check(double p, double r, int d) {
  if (d != 1 && d != 2)
    throw std::invalid_argument("dimension must be 1 or 2");
  if (std::isnan(p) || std::isnan(r)) return false;
  if (p < 2.0 || r < 2.0) return false;
  if (d == 2 && p == 2.0 && std::isinf(r)) return false;
  const double lhs = std::isinf(p) ? 0.0 : 2.0 / p;
  const double rhs = d / 2.0 - (std::isinf(r) ? 0.0 : d / r);
  return std::abs(lhs - rhs) <= 1e-12;
}

}  // namespace snls

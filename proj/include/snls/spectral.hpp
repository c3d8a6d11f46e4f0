#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace snls {

using cplx = std::complex<double>;

/// Uniform periodic grid on the box [-L/2, L/2)^dim with n points per axis.
/// Wavenumbers follow FFT storage order: 2*pi/L * (0, 1, ..., n/2-1, -n/2, ..., -1).
class SpectralGrid {
public:
  static std::shared_ptr<const SpectralGrid> make(int dim, int n, double length);

  int dim() const { return dim_; }
  int points_per_axis() const { return n_; }
  double length() const { return length_; }
  std::size_t size() const { return size_; }
  double cell_volume() const { return cell_volume_; }
  double volume() const { return volume_; }

  /// Per-axis wavenumber table in FFT order, size n.
  const std::vector<double>& axis_wavenumbers() const { return axis_k_; }
  /// |k|^2 for every grid point (flattened row-major for dim 2), size n^dim.
  const std::vector<double>& k_squared() const { return k_squared_; }
  /// Per-axis physical coordinates x_i = -L/2 + i*L/n, size n.
  const std::vector<double>& axis_coordinates() const { return axis_x_; }

  /// Integer frequency along one axis for a flattened index, in [-n/2, n/2).
  int axis_frequency(std::size_t flat, int axis) const;

private:
  SpectralGrid() = default;
  int dim_ = 1;
  int n_ = 0;
  double length_ = 0.0;
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
  double volume_ = 0.0;
  std::vector<double> axis_k_;
  std::vector<double> axis_x_;
  std::vector<double> k_squared_;
};

enum class Rep { Physical, Fourier };

/// Complex scalar field on a SpectralGrid, tagged with its representation.
/// Fourier coefficients are stored so that a constant physical field c has
/// coefficient c at frequency zero (forward transform averages).
class ComplexField {
public:
  ComplexField(std::shared_ptr<const SpectralGrid> grid, Rep rep = Rep::Physical);

  static ComplexField from_function(std::shared_ptr<const SpectralGrid> grid,
                                    const std::function<cplx(double)>& f);
  static ComplexField from_function(std::shared_ptr<const SpectralGrid> grid,
                                    const std::function<cplx(double, double)>& f);
  static ComplexField constant(std::shared_ptr<const SpectralGrid> grid, cplx value);

  const SpectralGrid& grid() const { return *grid_; }
  const std::shared_ptr<const SpectralGrid>& grid_ptr() const { return grid_; }
  Rep rep() const { return rep_; }
  void set_rep(Rep rep) { rep_ = rep; }

  std::size_t size() const { return data_.size(); }
  cplx& operator[](std::size_t i) { return data_[i]; }
  const cplx& operator[](std::size_t i) const { return data_[i]; }
  std::span<cplx> values() { return data_; }
  std::span<const cplx> values() const { return data_; }
  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }

private:
  std::shared_ptr<const SpectralGrid> grid_;
  Rep rep_;
  std::vector<cplx> data_;
};

/// In-place transforms between representations; exact inverses of each other.
void to_fourier(ComplexField& f);
void to_physical(ComplexField& f);

/// Value-returning transform wrappers; argument must be in the source
/// representation.
ComplexField forward_transform(const ComplexField& physical);
ComplexField inverse_transform(const ComplexField& fourier);

/// Applies the free Schroedinger group exp(i*dt*Laplacian): each Fourier
/// coefficient is multiplied by exp(-i*|k|^2*dt).  Representation of the
/// result matches the input.
ComplexField free_propagate(const ComplexField& f, double dt);
void free_propagate_in_place(ComplexField& f, double dt);

/// Yosida smoothing mu*(mu - Laplacian)^{-1}: multiplier mu/(mu + |k|^2).
ComplexField yosida_apply(const ComplexField& f, double mu);
void yosida_apply_in_place(ComplexField& f, double mu);

/// Zeroes every mode whose integer frequency along any axis exceeds n/3
/// in absolute value (two-thirds rule).
void dealias_in_place(ComplexField& f);

/// L^2 norm with the continuum normalization; representation-independent
/// (the two weights make Parseval exact).
double l2_norm(const ComplexField& f);
/// L^r norm, physical representation only; r in [2, inf), or infinity for
/// the sup norm.
double lr_norm(const ComplexField& f, double r);
cplx inner_product(const ComplexField& a, const ComplexField& b);

/// Whether (p, r) satisfies 2/p = d/2 - d/r with p, r >= 2 and excluding
/// (2, inf) in dimension 2.  Infinities are accepted.
bool admissible_pair_check(double p, double r, int d);

}  // namespace snls

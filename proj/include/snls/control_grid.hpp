#pragma once

#include <cstddef>
#include <vector>

namespace snls {

/// Piecewise-constant intensity tilt psi(t, z) >= 0 on a time-bin grid.
/// Columns resolve the mark dependence: one column per atom of a discrete
/// measure, or a single column for a mark-independent tilt.  psi == 1 is
/// the untilted noise.
class Control {
public:
  Control() = default;
  Control(std::vector<double> bin_edges, int columns, std::vector<double> values);

  /// Constant tilt on a uniform grid over [0, horizon].
  static Control constant(double value, double horizon, int bins, int columns);

  int bins() const { return static_cast<int>(edges_.size()) - 1; }
  int columns() const { return columns_; }
  const std::vector<double>& bin_edges() const { return edges_; }
  double horizon() const { return edges_.back(); }

  double value(int bin, int column) const;
  double& value(int bin, int column);
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Bin containing time t; the final bin is closed on the right.
  int bin_index(double t) const;
  /// psi at (t, column); column counts above the stored width broadcast
  /// column zero so a single-column tilt applies to every mark.
  double value_at(double t, int column) const;

  double max_value() const;

  /// Splits every bin into `factor` equal parts, repeating values; the
  /// refined control represents the same function of time.
  Control refined(int factor) const;

private:
  std::vector<double> edges_;
  int columns_ = 0;
  std::vector<double> values_;
};

}  // namespace snls

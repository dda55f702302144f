#pragma once

#include <span>
#include <vector>

namespace fkbridge {

/// Uniform 1-D mesh carrying trapezoid quadrature weights.
///
/// Every field, kernel matrix and density in the toolkit lives on one of
/// these; sharing a single mesh is what makes kernel products composable
/// by plain quadrature.
struct Grid {
  double lo = 0.0;
  double hi = 1.0;
  int n = 0;
  std::vector<double> points;
  std::vector<double> weights;

  double spacing() const { return (hi - lo) / static_cast<double>(n - 1); }

  bool same_mesh_as(const Grid& other, double tol = 1e-12) const;
};

/// Equally spaced grid on [lo, hi] with half-weight endpoints. Requires
/// lo < hi and n >= 3.
Grid make_uniform_grid(double lo, double hi, int n);

/// Trapezoid approximation of the integral of `values` over the grid.
/// Rejects length mismatches and non-finite entries.
double quad(const Grid& grid, std::span<const double> values);

/// Trapezoid integral restricted to [a, b] (intersected with the grid).
/// End cells are cut by linear interpolation, so band edges need not sit
/// on mesh nodes.
double quad_band(const Grid& grid, std::span<const double> values, double a,
                 double b);

/// First derivative on the grid: central differences in the interior,
/// second-order one-sided stencils at the two endpoints.
std::vector<double> gradient(const Grid& grid, std::span<const double> values);

/// Piecewise-linear interpolation, exact at the nodes. x must lie inside
/// [lo, hi]; extrapolation is refused because interpolated densities must
/// never go negative.
double interp_linear(const Grid& grid, std::span<const double> values,
                     double x);

}  // namespace fkbridge

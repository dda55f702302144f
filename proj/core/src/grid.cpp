#include "fkbridge/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fkbridge/errors.hpp"

namespace fkbridge {

namespace {

void check_length(const Grid& grid, std::span<const double> values,
                  const char* op) {
  if (static_cast<int>(values.size()) != grid.n) {
    throw DomainError(std::string(op) + ": expected " +
                      std::to_string(grid.n) + " values, got " +
                      std::to_string(values.size()));
  }
}

}  // namespace

bool Grid::same_mesh_as(const Grid& other, double tol) const {
  return n == other.n && std::abs(lo - other.lo) <= tol &&
         std::abs(hi - other.hi) <= tol;
}

Grid make_uniform_grid(double lo, double hi, int n) {
  if (!(lo < hi)) {
    throw DomainError("make_uniform_grid: requires lo < hi, got [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  if (n < 3) {
    throw DomainError("make_uniform_grid: requires n >= 3, got " +
                      std::to_string(n));
  }
  Grid grid;
  grid.lo = lo;
  grid.hi = hi;
  grid.n = n;
  grid.points.resize(n);
  grid.weights.resize(n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) {
    grid.points[i] = lo + static_cast<double>(i) * h;
    grid.weights[i] = h;
  }
  grid.points.back() = hi;
  grid.weights.front() = 0.5 * h;
  grid.weights.back() = 0.5 * h;
  return grid;
}

double quad(const Grid& grid, std::span<const double> values) {
  check_length(grid, values, "quad");
  double acc = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError("quad: non-finite value at index " +
                         std::to_string(i));
    }
    acc += grid.weights[i] * values[i];
  }
  return acc;
}

double quad_band(const Grid& grid, std::span<const double> values, double a,
                 double b) {
  check_length(grid, values, "quad_band");
  a = std::max(a, grid.lo);
  b = std::min(b, grid.hi);
  if (!(a < b)) return 0.0;

  const double h = grid.spacing();
  // Cells [i, i+1] overlapping [a, b]; partial cells integrate the linear
  // interpolant between the cut points.
  const int first = std::clamp(
      static_cast<int>(std::floor((a - grid.lo) / h)), 0, grid.n - 2);
  const int last = std::clamp(static_cast<int>(std::floor((b - grid.lo) / h)),
                              0, grid.n - 2);
  auto value_at = [&](int cell, double x) {
    const double t = (x - grid.points[cell]) / h;
    return (1.0 - t) * values[cell] + t * values[cell + 1];
  };
  double acc = 0.0;
  for (int cell = first; cell <= last; ++cell) {
    const double x0 = std::max(a, grid.points[cell]);
    const double x1 = std::min(b, grid.points[cell + 1]);
    if (!(x0 < x1)) continue;
    acc += 0.5 * (value_at(cell, x0) + value_at(cell, x1)) * (x1 - x0);
  }
  return acc;
}

std::vector<double> gradient(const Grid& grid, std::span<const double> values) {
  check_length(grid, values, "gradient");
  const int n = grid.n;
  const double inv2h = 1.0 / (2.0 * grid.spacing());
  std::vector<double> out(n);
  out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) * inv2h;
  for (int i = 1; i + 1 < n; ++i) {
    out[i] = (values[i + 1] - values[i - 1]) * inv2h;
  }
  out[n - 1] =
      (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) * inv2h;
  return out;
}

double interp_linear(const Grid& grid, std::span<const double> values,
                     double x) {
  check_length(grid, values, "interp_linear");
  if (x < grid.lo || x > grid.hi) {
    throw DomainError("interp_linear: x = " + std::to_string(x) +
                      " outside [" + std::to_string(grid.lo) + ", " +
                      std::to_string(grid.hi) + "] (no extrapolation)");
  }
  const double h = grid.spacing();
  int cell = static_cast<int>((x - grid.lo) / h);
  cell = std::clamp(cell, 0, grid.n - 2);
  if (x == grid.points[cell]) return values[cell];
  if (x >= grid.points[cell + 1]) return values[cell + 1];
  const double t = (x - grid.points[cell]) / h;
  return (1.0 - t) * values[cell] + t * values[cell + 1];
}

}  // namespace fkbridge

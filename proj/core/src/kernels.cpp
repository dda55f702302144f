#include "fkbridge/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fkbridge/errors.hpp"
#include "fkbridge/threads.hpp"
#include "kernel_internal.hpp"

namespace fkbridge {

namespace detail {

Eigen::MatrixXd heat_matrix(const Grid& grid, double s, double t) {
  Eigen::MatrixXd values(grid.n, grid.n);
  parallel_for(0, grid.n, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      for (int j = 0; j < grid.n; ++j) {
        values(i, j) = heat_kernel(grid.points[i], s, grid.points[j], t);
      }
    }
  });
  return values;
}

void validate_kernel_entries(const Eigen::MatrixXd& values, const Grid& grid,
                             double s, double t, const char* context) {
  constexpr double kRepresentable = 1e-280;
  for (int i = 0; i < values.rows(); ++i) {
    for (int j = 0; j < values.cols(); ++j) {
      const double v = values(i, j);
      if (std::isnan(v) || v < 0.0 ||
          (v == 0.0 &&
           heat_kernel(grid.points[i], s, grid.points[j], t) > kRepresentable)) {
        throw ConvergenceError(
            std::string(context) + ": entry (" + std::to_string(i) + ", " +
            std::to_string(j) + ") = " + std::to_string(v) +
            " lost strict positivity; increase n_terms or shorten the "
            "interval split");
      }
    }
  }
}

}  // namespace detail

double heat_kernel(double y, double s, double x, double t) {
  if (!(t > s)) {
    throw DomainError("heat_kernel: requires t > s, got s = " +
                      std::to_string(s) + ", t = " + std::to_string(t));
  }
  const double dt = t - s;
  const double d = x - y;
  return std::exp(-d * d / (4.0 * dt)) /
         std::sqrt(4.0 * std::numbers::pi * dt);
}

std::string_view to_string(KernelMethod method) {
  switch (method) {
    case KernelMethod::heat:
      return "heat";
    case KernelMethod::parametrix:
      return "parametrix";
    case KernelMethod::monte_carlo:
      return "monte_carlo";
  }
  return "unknown";
}

KernelMethod kernel_method_from_string(std::string_view name) {
  if (name == "heat") return KernelMethod::heat;
  if (name == "parametrix") return KernelMethod::parametrix;
  if (name == "monte_carlo") return KernelMethod::monte_carlo;
  throw DomainError("unknown kernel method '" + std::string(name) + "'");
}

namespace {

// Bridge positions are sampled at the n_steps midpoint times of [0, 1];
// exact conditional-Gaussian forward recursion for the bridge of the
// variance-2 process pinned to 0 at both ends.
void sample_bridge_midpoints(RngStream& rng, int n_steps, double* out) {
  double a = 0.0;
  double u_prev = 0.0;
  for (int j = 1; j <= n_steps; ++j) {
    const double u = (2.0 * j - 1.0) / (2.0 * n_steps);
    const double mean = a * (1.0 - u) / (1.0 - u_prev);
    const double var = 2.0 * (u - u_prev) * (1.0 - u) / (1.0 - u_prev);
    a = mean + std::sqrt(var) * rng.normal();
    u_prev = u;
    out[j - 1] = a;
  }
}

double bridge_weight(const Potential& pot, double y, double s, double x,
                     double t, const double* alpha, int n_steps) {
  const double delta = t - s;
  const double dtau = delta / n_steps;
  const double sqrt_delta = std::sqrt(delta);
  double integral = 0.0;
  for (int l = 0; l < n_steps; ++l) {
    const double tau = s + (l + 0.5) * dtau;
    const double pos =
        ((t - tau) * y + (tau - s) * x) / delta + sqrt_delta * alpha[l];
    const double c = pot(pos, tau);
    if (!std::isfinite(c)) {
      throw NumericError("fk_kernel_mc: potential '" + pot.name() +
                         "' not finite at (x = " + std::to_string(pos) +
                         ", t = " + std::to_string(tau) + ")");
    }
    integral += c * dtau;
  }
  return std::exp(-integral);
}

void check_mc_args(double s, double t, int n_paths, int n_steps) {
  if (!(t > s)) {
    throw DomainError("fk_kernel_mc: requires t > s");
  }
  if (n_paths < 100) {
    throw DomainError("fk_kernel_mc: requires n_paths >= 100, got " +
                      std::to_string(n_paths));
  }
  if (n_steps < 2) {
    throw DomainError("fk_kernel_mc: requires n_steps >= 2, got " +
                      std::to_string(n_steps));
  }
}

// Mean and standard error accumulated relative to the first sample, so a
// path-independent integrand (zero or constant potential) yields the exact
// sample value with standard error exactly zero.
struct PivotAccumulator {
  double pivot = 0.0;
  double sum_d = 0.0;
  double sum_d2 = 0.0;
  long count = 0;

  void add(double w) {
    if (count == 0) pivot = w;
    const double d = w - pivot;
    sum_d += d;
    sum_d2 += d * d;
    ++count;
  }
  double mean() const { return pivot + sum_d / static_cast<double>(count); }
  double std_error() const {
    const double n = static_cast<double>(count);
    const double var = std::max(0.0, (sum_d2 - sum_d * sum_d / n) / (n - 1.0));
    return std::sqrt(var / n);
  }
};

}  // namespace

McEstimate fk_kernel_mc(const Potential& pot, double y, double s, double x,
                        double t, int n_paths, int n_steps, RngStream rng) {
  check_mc_args(s, t, n_paths, n_steps);
  const double prefactor = heat_kernel(y, s, x, t);
  std::vector<double> alpha(n_steps);
  PivotAccumulator acc;
  for (int p = 0; p < n_paths; ++p) {
    RngStream path_rng = rng.substream(p);
    sample_bridge_midpoints(path_rng, n_steps, alpha.data());
    acc.add(bridge_weight(pot, y, s, x, t, alpha.data(), n_steps));
  }
  return {prefactor * acc.mean(), prefactor * acc.std_error()};
}

namespace {

KernelMatrix monte_carlo_matrix(const Potential& pot, const Grid& grid,
                                double s, double t,
                                const KernelOptions& opts) {
  check_mc_args(s, t, opts.n_paths, opts.n_steps);
  // One shared set of bridge paths across all (y, x) pairs: correlated but
  // unbiased entries, and the only way a full matrix stays affordable.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      alphas(opts.n_paths, opts.n_steps);
  for (int p = 0; p < opts.n_paths; ++p) {
    RngStream path_rng = opts.rng.substream(p);
    sample_bridge_midpoints(path_rng, opts.n_steps, alphas.row(p).data());
  }
  KernelMatrix out;
  out.grid = grid;
  out.s = s;
  out.t = t;
  out.method = KernelMethod::monte_carlo;
  out.values.resize(grid.n, grid.n);
  out.std_error.emplace(grid.n, grid.n);
  parallel_for(0, grid.n, [&](std::int64_t row_lo, std::int64_t row_hi) {
    for (std::int64_t i = row_lo; i < row_hi; ++i) {
      for (int j = 0; j < grid.n; ++j) {
        const double k0 = heat_kernel(grid.points[i], s, grid.points[j], t);
        PivotAccumulator acc;
        for (int p = 0; p < opts.n_paths; ++p) {
          acc.add(bridge_weight(pot, grid.points[i], s, grid.points[j], t,
                                alphas.row(p).data(), opts.n_steps));
        }
        out.values(i, j) = k0 * acc.mean();
        (*out.std_error)(i, j) = k0 * acc.std_error();
      }
    }
  });
  detail::validate_kernel_entries(out.values, grid, s, t, "monte_carlo kernel");
  return out;
}

std::vector<double> uniform_mesh(double a, double b, int points) {
  std::vector<double> mesh(points);
  for (int i = 0; i < points; ++i) {
    mesh[i] = a + (b - a) * i / static_cast<double>(points - 1);
  }
  mesh.front() = a;
  mesh.back() = b;
  return mesh;
}

KernelMatrix parametrix_composed(const Potential& pot, const Grid& grid,
                                 double s, double t,
                                 const KernelOptions& opts) {
  double split_len = opts.split_max;
  if (opts.auto_split) {
    // The raw series needs sup|c| * split <~ 1 to converge comfortably.
    const Box box{grid.lo, grid.hi, s, t};
    const double c_abs =
        std::max(pot.positive_part_bound(box), pot.lower_bound());
    split_len = std::min(split_len, 1.0 / std::max(1.0, c_abs));
  }
  const int n_splits = std::max(
      1, static_cast<int>(std::ceil((t - s) / split_len - 1e-12)));
  if (n_splits == 1) {
    return fk_kernel_parametrix(
        pot, grid, uniform_mesh(s, t, std::max(2, opts.submesh_points)), s, t,
        opts.n_terms);
  }
  std::vector<KernelMatrix> pieces(n_splits);
  parallel_for(0, n_splits, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t k = lo; k < hi; ++k) {
      const double a = s + (t - s) * static_cast<double>(k) / n_splits;
      const double b = s + (t - s) * static_cast<double>(k + 1) / n_splits;
      pieces[k] = fk_kernel_parametrix(
          pot, grid, uniform_mesh(a, b, std::max(2, opts.submesh_points)), a,
          b, opts.n_terms);
    }
  });
  KernelMatrix result = std::move(pieces.front());
  for (int k = 1; k < n_splits; ++k) result = compose(result, pieces[k]);
  result.s = s;
  result.t = t;
  return result;
}

}  // namespace

KernelMatrix kernel_matrix(const Potential& pot, const Grid& grid, double s,
                           double t, KernelMethod method,
                           const KernelOptions& opts) {
  if (!(t > s)) {
    throw DomainError("kernel_matrix: requires t > s");
  }
  switch (method) {
    case KernelMethod::heat: {
      KernelMatrix out;
      out.grid = grid;
      out.s = s;
      out.t = t;
      out.method = KernelMethod::heat;
      out.values = detail::heat_matrix(grid, s, t);
      return out;
    }
    case KernelMethod::parametrix:
      return parametrix_composed(pot, grid, s, t, opts);
    case KernelMethod::monte_carlo:
      return monte_carlo_matrix(pot, grid, s, t, opts);
  }
  throw DomainError("kernel_matrix: unknown method");
}

KernelMatrix compose(const KernelMatrix& a, const KernelMatrix& b) {
  if (!a.grid.same_mesh_as(b.grid)) {
    throw DomainError("compose: kernels live on different grids");
  }
  if (std::abs(a.t - b.s) > 1e-12) {
    throw DomainError("compose: time intervals do not abut (a.t = " +
                      std::to_string(a.t) + ", b.s = " + std::to_string(b.s) +
                      ")");
  }
  KernelMatrix out;
  out.grid = a.grid;
  out.s = a.s;
  out.t = b.t;
  out.method = a.method;
  const Eigen::Map<const Eigen::VectorXd> w(a.grid.weights.data(), a.grid.n);
  out.values.noalias() = a.values * (w.asDiagonal() * b.values);
  return out;
}

bool path_confined(const Grid& grid, double y, double x, double interval) {
  constexpr double kLogTol = 18.420680743952367;  // -ln(1e-8)
  const double need = kLogTol * interval;
  return (grid.hi - y) * (grid.hi - x) >= need &&
         (y - grid.lo) * (x - grid.lo) >= need;
}

double chapman_kolmogorov_residual(const KernelMatrix& k_sr,
                                   const KernelMatrix& k_rt,
                                   const KernelMatrix& k_st) {
  const Grid& grid = k_st.grid;
  if (!k_sr.grid.same_mesh_as(grid) || !k_rt.grid.same_mesh_as(grid)) {
    throw DomainError("chapman_kolmogorov_residual: mismatched grids");
  }
  if (std::abs(k_sr.t - k_rt.s) > 1e-12 || std::abs(k_sr.s - k_st.s) > 1e-12 ||
      std::abs(k_rt.t - k_st.t) > 1e-12) {
    throw DomainError("chapman_kolmogorov_residual: time pairs do not chain");
  }
  const double s = k_st.s, t = k_st.t;
  const Eigen::Map<const Eigen::VectorXd> w(grid.weights.data(), grid.n);
  Eigen::MatrixXd composed = k_sr.values * (w.asDiagonal() * k_rt.values);

  double worst = -1.0;
  for (int i = 0; i < grid.n; ++i) {
    for (int j = 0; j < grid.n; ++j) {
      if (!path_confined(grid, grid.points[i], grid.points[j], t - s)) {
        continue;
      }
      const double reference = k_st.values(i, j);
      if (!(reference > 0.0)) continue;
      worst = std::max(worst,
                       std::abs(composed(i, j) - reference) / reference);
    }
  }
  if (worst < 0.0) {
    throw DomainError(
        "chapman_kolmogorov_residual: no grid pair is path-confined; widen "
        "the grid or shorten the intervals");
  }
  return worst;
}

bool positivity_bound_check(const KernelMatrix& kernel, const Potential& pot,
                            double r_box) {
  if (r_box < kernel.grid.hi) {
    throw DomainError("positivity_bound_check: requires r_box >= grid.hi");
  }
  const double interval = kernel.interval();
  const double c_plus =
      pot.positive_part_bound(Box{-r_box, r_box, kernel.s, kernel.t});
  const double factor = 0.5 * std::exp(-interval * c_plus);
  const Grid& grid = kernel.grid;
  for (int i = 0; i < grid.n; ++i) {
    for (int j = 0; j < grid.n; ++j) {
      const double bound =
          factor * heat_kernel(grid.points[i], kernel.s, grid.points[j],
                               kernel.t);
      double slack = 0.0;
      if (kernel.std_error) slack = 3.0 * (*kernel.std_error)(i, j);
      if (kernel.values(i, j) + slack < bound) return false;
    }
  }
  return true;
}

double time_reversal_residual(const Potential& pot, const Grid& grid,
                              double horizon, KernelMethod method,
                              const KernelOptions& opts) {
  if (!(horizon > 0.0)) {
    throw DomainError("time_reversal_residual: requires horizon > 0");
  }
  const KernelMatrix forward =
      kernel_matrix(pot, grid, 0.0, horizon, method, opts);
  const KernelMatrix reversed = kernel_matrix(
      pot.time_reversed(horizon), grid, 0.0, horizon, method, opts);
  double worst = -1.0;
  for (int i = 0; i < grid.n; ++i) {
    for (int j = 0; j < grid.n; ++j) {
      if (!path_confined(grid, grid.points[i], grid.points[j], horizon)) {
        continue;
      }
      const double reference = forward.values(j, i);
      if (!(reference > 0.0)) continue;
      worst = std::max(
          worst, std::abs(reversed.values(i, j) - reference) / reference);
    }
  }
  if (worst < 0.0) {
    throw DomainError(
        "time_reversal_residual: no grid pair is path-confined over this "
        "horizon; widen the grid");
  }
  return worst;
}

}  // namespace fkbridge

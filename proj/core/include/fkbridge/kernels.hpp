#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fkbridge/grid.hpp"
#include "fkbridge/potential.hpp"
#include "fkbridge/rng.hpp"

namespace fkbridge {

/// Heat kernel k0(y,s,x,t) = [4 pi (t-s)]^{-1/2} exp[-(x-y)^2 / 4(t-s)],
/// the generator-Laplacian normalization (transition variance 2(t-s)).
/// Requires t > s.
double heat_kernel(double y, double s, double x, double t);

enum class KernelMethod { heat, parametrix, monte_carlo };

std::string_view to_string(KernelMethod method);
KernelMethod kernel_method_from_string(std::string_view name);

/// Discretized semigroup kernel on grid x grid for one time pair (s, t):
/// values(i,j) ~ k(points[i], s, points[j], t). Entries are strictly
/// positive wherever double precision can represent them; entries whose
/// heat-kernel envelope itself underflows may be exactly zero (wide grids,
/// short intervals) and are tolerated as unrepresentable rather than wrong.
struct KernelMatrix {
  Grid grid;
  double s = 0.0;
  double t = 0.0;
  KernelMethod method = KernelMethod::heat;
  Eigen::MatrixXd values;
  /// Per-entry standard error; only Monte Carlo constructions fill this.
  std::optional<Eigen::MatrixXd> std_error;

  double interval() const { return t - s; }
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Single-point Feynman-Kac kernel by Brownian-bridge Monte Carlo:
/// k0(y,s,x,t) times the sample mean of exp(-integral of c along scaled
/// bridge paths). The bridge is sampled at the n_steps midpoint times and
/// the time integral uses the midpoint rule, which never evaluates the
/// pinned endpoints. Requires t > s, n_paths >= 100, n_steps >= 2.
McEstimate fk_kernel_mc(const Potential& pot, double y, double s, double x,
                        double t, int n_paths, int n_steps, RngStream rng);

/// Alternating parametrix series truncated at n_terms, assembled on the
/// grid with nested quadrature: spatial integrals by grid trapezoid, time
/// integrals by trapezoid over the time_mesh points inside [s, t]. The
/// series is only reliable on short intervals; kernel_matrix() composes
/// split sub-intervals for anything longer.
KernelMatrix fk_kernel_parametrix(const Potential& pot, const Grid& grid,
                                  std::span<const double> time_mesh, double s,
                                  double t, int n_terms);

/// The individual series terms k_0, k_1, ..., k_{n_terms} at (s, t); the
/// alternating sum of these is fk_kernel_parametrix. Exposed for the
/// term-by-term Taylor checks.
std::vector<Eigen::MatrixXd> fk_kernel_parametrix_terms(
    const Potential& pot, const Grid& grid, std::span<const double> time_mesh,
    double s, double t, int n_terms);

struct KernelOptions {
  int n_terms = 8;
  /// Longest parametrix sub-interval before Chapman-Kolmogorov composition.
  double split_max = 0.25;
  /// Tighten the split to ~1/sup|c| on the grid box; the raw series
  /// diverges once sup|c| * (t-s) grows past a few units.
  bool auto_split = true;
  /// Time-quadrature nodes per sub-interval (>= 2).
  int submesh_points = 5;
  /// Monte Carlo matrices: shared bridge paths across all (y, x) pairs.
  int n_paths = 2000;
  int n_steps = 64;
  RngStream rng = RngStream(0, 0);
};

/// Dispatch over the three constructions. parametrix splits [s, t] into
/// sub-intervals and composes them; monte_carlo reuses one set of bridge
/// paths for every matrix entry (correlated but unbiased) and fills
/// std_error.
KernelMatrix kernel_matrix(const Potential& pot, const Grid& grid, double s,
                           double t, KernelMethod method,
                           const KernelOptions& opts = {});

/// Chapman-Kolmogorov product of two kernels sharing a grid, a.t == b.s.
KernelMatrix compose(const KernelMatrix& a, const KernelMatrix& b);

/// True when a path pinned to y and x over an interval of that length stays
/// inside [lo, hi] up to exit probability ~1e-8 (Brownian-bridge exit bound
/// exp(-d_y d_x / interval) per boundary side). Identities that compare
/// against free-space kernels are certifiable on a truncated grid only for
/// such pairs; at boundary-touching pairs the quadrature cuts path mass and
/// no construction can restore it.
bool path_confined(const Grid& grid, double y, double x, double interval);

/// Relative sup deviation of quad_z k_sr(y,.,z) k_rt(z,.,x) from k_st(y,.,x)
/// over the path-confined (i,j) pairs.
double chapman_kolmogorov_residual(const KernelMatrix& k_sr,
                                   const KernelMatrix& k_rt,
                                   const KernelMatrix& k_st);

/// Entrywise check of the strict-positivity lower bound
///   k >= 1/2 k0 exp[-(t-s) C],  C = sup of c_plus on [-r_box, r_box]x[s,t].
/// Monte Carlo matrices are allowed 3 standard errors of slack.
/// Requires r_box >= grid.hi.
bool positivity_bound_check(const KernelMatrix& kernel, const Potential& pot,
                            double r_box);

/// Builds k for the potential and K for its time reversal over [0, horizon]
/// with the same method and options, and returns the sup relative deviation
/// |K(i,j) - k(j,i)| / k(j,i) over path-confined pairs; the two kernels
/// coincide up to transposition, so the residual measures numerics only.
double time_reversal_residual(const Potential& pot, const Grid& grid,
                              double horizon, KernelMethod method,
                              const KernelOptions& opts = {});

}  // namespace fkbridge

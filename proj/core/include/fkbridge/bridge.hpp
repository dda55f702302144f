#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "fkbridge/grid.hpp"
#include "fkbridge/kernels.hpp"

namespace fkbridge {

/// Strictly positive boundary densities at t = 0 and t = T, renormalized
/// to unit mass on the (deliberately truncated) grid.
struct BoundaryData {
  Grid grid;
  std::vector<double> rho0;
  std::vector<double> rhoT;
  double T = 1.0;
};

/// Validates positivity and renormalizes both densities on the grid.
BoundaryData make_boundary_data(const Grid& grid, std::span<const double> rho0,
                                std::span<const double> rhoT, double T);

/// The solved factor pair and (after propagate_fields) the interpolating
/// fields over a time mesh. The factorization is gauge-fixed by
/// quad(f0) = 1; the pair (f, g) is otherwise unique only up to a
/// multiplicative constant.
struct BridgeSolution {
  Grid grid;
  double T = 0.0;
  std::vector<double> f0;
  std::vector<double> gT;
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<double> residual_history;

  std::vector<double> time_mesh;                // filled by propagate_fields
  std::vector<std::vector<double>> f_field;     // f(., time_mesh[m])
  std::vector<std::vector<double>> g_field;     // g(., time_mesh[m])

  /// Index of a mesh time (tolerance 1e-9); throws DomainError if absent.
  std::size_t mesh_index(double t) const;

  /// rho(., time_mesh[m]) = f_field[m] .* g_field[m].
  std::vector<double> density_at(std::size_t m) const;
};

/// Alternating fixed-point (iterative proportional fitting) for the pair
/// (f0, gT): g <- rhoT / K^T f, then f <- rho0 / K g, iterated until the
/// larger of the two L1 marginal errors drops below tol. Positivity of the
/// iterates is automatic for positive inputs; the residual history is
/// recorded for monotonicity checks. f_init seeds the iteration (defaults
/// to rho0) so uniqueness can be probed from different starting points.
BridgeSolution solve_schroedinger_system(const KernelMatrix& kernel_0T,
                                         const BoundaryData& data, double tol,
                                         int max_iter);
BridgeSolution solve_schroedinger_system(const KernelMatrix& kernel_0T,
                                         const BoundaryData& data, double tol,
                                         int max_iter,
                                         std::span<const double> f_init);

/// Fills f_field (forward from f0) and g_field (backward from gT) through a
/// consecutive tiling of [0, T] by short kernels.
BridgeSolution propagate_fields(BridgeSolution sol,
                                std::span<const KernelMatrix> tiles);

/// Markov transition density of the interpolation:
/// p(y,s,x,t) = k(y,s,x,t) g(x,t) / g(y,s).
struct TransitionDensity {
  Grid grid;
  double s = 0.0;
  double t = 0.0;
  Eigen::MatrixXd values;
  /// max_i |quad_x p(y_i,s,x,t) - 1| observed at construction.
  double max_row_deviation = 0.0;
};

/// Builds p from a kernel over (s, t) and the solution's g-field at those
/// mesh times. Rows are never renormalized: a row integral farther than
/// 1e-3 from one signals a kernel/field mismatch and raises
/// ConsistencyError instead of being silently rescaled away.
TransitionDensity transition_density(const KernelMatrix& kernel_st,
                                     const BridgeSolution& sol);

/// quad_y p(y,s,x,t) rho_s(y); conserves mass to quadrature accuracy.
std::vector<double> propagate_density(const TransitionDensity& p,
                                      std::span<const double> rho_s);

/// Transition densities for arbitrary (s, t) with s on the solution mesh
/// and t anywhere in (s, T]: g at off-mesh t is pulled back from the next
/// mesh point and g at s is re-derived through the same short kernel, so
/// every row integrates to one exactly (up to round-off) by construction.
class TransitionBuilder {
 public:
  TransitionBuilder(Potential pot, const BridgeSolution& sol,
                    KernelMethod method, KernelOptions opts = {});

  TransitionDensity operator()(double s, double t) const;

 private:
  Potential pot_;
  const BridgeSolution& sol_;
  KernelMethod method_;
  KernelOptions opts_;
};

}  // namespace fkbridge

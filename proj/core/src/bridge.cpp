#include "fkbridge/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "fkbridge/errors.hpp"

namespace fkbridge {

namespace {

constexpr double kTimeTol = 1e-9;
constexpr double kDivisionFloor = 1e-300;

using VectorMap = Eigen::Map<const Eigen::VectorXd>;

Eigen::VectorXd to_vector(std::span<const double> v) {
  return VectorMap(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_strictly_positive(const Eigen::VectorXd& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v(i) > 0.0) || !std::isfinite(v(i))) {
      throw NumericError(std::string(what) + " lost strict positivity at index " +
                         std::to_string(i));
    }
  }
}

Eigen::VectorXd safe_divide(const Eigen::VectorXd& num,
                            const Eigen::VectorXd& den, const char* what) {
  Eigen::VectorXd out(num.size());
  for (Eigen::Index i = 0; i < num.size(); ++i) {
    if (!(den(i) > kDivisionFloor)) {
      throw NumericError(std::string(what) +
                         ": denominator collapsed at index " +
                         std::to_string(i) + " (corrupted kernel?)");
    }
    out(i) = num(i) / den(i);
  }
  return out;
}

}  // namespace

BoundaryData make_boundary_data(const Grid& grid, std::span<const double> rho0,
                                std::span<const double> rhoT, double T) {
  if (!(T > 0.0)) throw DomainError("make_boundary_data: requires T > 0");
  if (static_cast<int>(rho0.size()) != grid.n ||
      static_cast<int>(rhoT.size()) != grid.n) {
    throw DomainError("make_boundary_data: density length != grid.n");
  }
  BoundaryData data;
  data.grid = grid;
  data.T = T;
  data.rho0.assign(rho0.begin(), rho0.end());
  data.rhoT.assign(rhoT.begin(), rhoT.end());
  for (auto* rho : {&data.rho0, &data.rhoT}) {
    for (std::size_t i = 0; i < rho->size(); ++i) {
      if (!((*rho)[i] > 0.0) || !std::isfinite((*rho)[i])) {
        throw DomainError(
            "make_boundary_data: boundary densities must be strictly "
            "positive (index " + std::to_string(i) + ")");
      }
    }
    const double mass = quad(grid, *rho);
    for (double& v : *rho) v /= mass;
  }
  return data;
}

std::size_t BridgeSolution::mesh_index(double t) const {
  for (std::size_t m = 0; m < time_mesh.size(); ++m) {
    if (std::abs(time_mesh[m] - t) <= kTimeTol) return m;
  }
  throw DomainError("BridgeSolution: t = " + std::to_string(t) +
                    " is not a mesh time");
}

std::vector<double> BridgeSolution::density_at(std::size_t m) const {
  std::vector<double> rho(grid.n);
  for (int i = 0; i < grid.n; ++i) rho[i] = f_field[m][i] * g_field[m][i];
  return rho;
}

BridgeSolution solve_schroedinger_system(const KernelMatrix& kernel_0T,
                                         const BoundaryData& data, double tol,
                                         int max_iter) {
  return solve_schroedinger_system(kernel_0T, data, tol, max_iter, data.rho0);
}

BridgeSolution solve_schroedinger_system(const KernelMatrix& kernel_0T,
                                         const BoundaryData& data, double tol,
                                         int max_iter,
                                         std::span<const double> f_init) {
  const Grid& grid = data.grid;
  if (!kernel_0T.grid.same_mesh_as(grid)) {
    throw DomainError("solve_schroedinger_system: kernel grid != data grid");
  }
  if (std::abs(kernel_0T.s) > kTimeTol ||
      std::abs(kernel_0T.t - data.T) > kTimeTol) {
    throw DomainError("solve_schroedinger_system: kernel must span (0, T)");
  }
  if (!(tol > 0.0)) {
    throw DomainError("solve_schroedinger_system: requires tol > 0");
  }
  if (kernel_0T.values.minCoeff() <= 0.0) {
    throw NumericError(
        "solve_schroedinger_system: kernel is not strictly positive");
  }

  const Eigen::MatrixXd& K = kernel_0T.values;
  const VectorMap w(grid.weights.data(), grid.n);
  const Eigen::VectorXd rho0 = to_vector(data.rho0);
  const Eigen::VectorXd rhoT = to_vector(data.rhoT);

  Eigen::VectorXd f = to_vector(f_init);
  check_strictly_positive(f, "solve_schroedinger_system: f_init");
  Eigen::VectorXd g = Eigen::VectorXd::Ones(grid.n);

  BridgeSolution sol;
  sol.grid = grid;
  sol.T = data.T;
  sol.residual_history.reserve(64);

  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    g = safe_divide(rhoT, K.transpose() * w.cwiseProduct(f).matrix(), "g update");
    f = safe_divide(rho0, K * w.cwiseProduct(g).matrix(), "f update");

    // L1 marginal errors of m(x,y) = f(x) k g(y); the t=0 marginal is exact
    // right after the f update, the t=T marginal carries the live residual.
    const Eigen::VectorXd marg0 =
        f.cwiseProduct(K * w.cwiseProduct(g).matrix());
    const Eigen::VectorXd margT =
        g.cwiseProduct(K.transpose() * w.cwiseProduct(f).matrix());
    double l1_0 = 0.0, l1_T = 0.0;
    for (int i = 0; i < grid.n; ++i) {
      l1_0 += grid.weights[i] * std::abs(marg0(i) - rho0(i));
      l1_T += grid.weights[i] * std::abs(margT(i) - rhoT(i));
    }
    const double residual = std::max(l1_0, l1_T);
    sol.residual_history.push_back(residual);
    sol.iterations = it + 1;
    sol.final_residual = residual;
    if (residual < tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError(
        "solve_schroedinger_system: residual " +
            std::to_string(sol.final_residual) + " after " +
            std::to_string(sol.iterations) + " iterations (tol " +
            std::to_string(tol) + ")",
        sol.residual_history);
  }

  // Gauge fix quad(f0) = 1; the product f k g is invariant.
  const double scale = quad(grid, std::span<const double>(f.data(), grid.n));
  f /= scale;
  g *= scale;
  check_strictly_positive(f, "solve_schroedinger_system: f0");
  check_strictly_positive(g, "solve_schroedinger_system: gT");

  sol.f0.assign(f.data(), f.data() + grid.n);
  sol.gT.assign(g.data(), g.data() + grid.n);
  return sol;
}

BridgeSolution propagate_fields(BridgeSolution sol,
                                std::span<const KernelMatrix> tiles) {
  const Grid& grid = sol.grid;
  if (tiles.empty()) {
    throw DomainError("propagate_fields: no kernel tiles");
  }
  if (std::abs(tiles.front().s) > kTimeTol ||
      std::abs(tiles.back().t - sol.T) > kTimeTol) {
    throw DomainError("propagate_fields: tiles do not span [0, T]");
  }
  for (std::size_t m = 0; m < tiles.size(); ++m) {
    if (!tiles[m].grid.same_mesh_as(grid)) {
      throw DomainError("propagate_fields: tile grid mismatch");
    }
    if (m > 0 && std::abs(tiles[m].s - tiles[m - 1].t) > kTimeTol) {
      throw DomainError("propagate_fields: gap in the kernel tiling at t = " +
                        std::to_string(tiles[m].s));
    }
  }

  const std::size_t n_times = tiles.size() + 1;
  sol.time_mesh.resize(n_times);
  sol.time_mesh[0] = tiles.front().s;
  for (std::size_t m = 0; m < tiles.size(); ++m) {
    sol.time_mesh[m + 1] = tiles[m].t;
  }

  const VectorMap w(grid.weights.data(), grid.n);
  std::vector<Eigen::VectorXd> f(n_times), g(n_times);
  f[0] = to_vector(sol.f0);
  for (std::size_t m = 0; m < tiles.size(); ++m) {
    f[m + 1] = tiles[m].values.transpose() * w.cwiseProduct(f[m]).matrix();
  }
  g[n_times - 1] = to_vector(sol.gT);
  for (std::size_t m = tiles.size(); m-- > 0;) {
    g[m] = tiles[m].values * w.cwiseProduct(g[m + 1]).matrix();
  }

  sol.f_field.resize(n_times);
  sol.g_field.resize(n_times);
  for (std::size_t m = 0; m < n_times; ++m) {
    check_strictly_positive(f[m], "propagate_fields: f");
    check_strictly_positive(g[m], "propagate_fields: g");
    sol.f_field[m].assign(f[m].data(), f[m].data() + grid.n);
    sol.g_field[m].assign(g[m].data(), g[m].data() + grid.n);
  }
  return sol;
}

namespace {

TransitionDensity transition_from_fields(const KernelMatrix& kernel_st,
                                         const Grid& grid,
                                         const Eigen::VectorXd& g_s,
                                         const Eigen::VectorXd& g_t) {
  TransitionDensity p;
  p.grid = grid;
  p.s = kernel_st.s;
  p.t = kernel_st.t;
  p.values.resize(grid.n, grid.n);
  for (int i = 0; i < grid.n; ++i) {
    if (!(g_s(i) > kDivisionFloor)) {
      throw NumericError("transition_density: g(y, s) collapsed at row " +
                         std::to_string(i));
    }
    for (int j = 0; j < grid.n; ++j) {
      p.values(i, j) = kernel_st.values(i, j) * g_t(j) / g_s(i);
    }
  }
  const VectorMap w(grid.weights.data(), grid.n);
  const Eigen::VectorXd row_mass = p.values * w.matrix();
  p.max_row_deviation = (row_mass.array() - 1.0).abs().maxCoeff();
  if (p.max_row_deviation > 1e-3) {
    throw ConsistencyError(
        "transition_density: row integral deviates from 1 by " +
        std::to_string(p.max_row_deviation) +
        "; kernel and g-field are inconsistent");
  }
  return p;
}

}  // namespace

TransitionDensity transition_density(const KernelMatrix& kernel_st,
                                     const BridgeSolution& sol) {
  if (!kernel_st.grid.same_mesh_as(sol.grid)) {
    throw DomainError("transition_density: kernel grid != solution grid");
  }
  const std::size_t is = sol.mesh_index(kernel_st.s);
  const std::size_t it = sol.mesh_index(kernel_st.t);
  const Eigen::VectorXd g_s = to_vector(sol.g_field.at(is));
  const Eigen::VectorXd g_t = to_vector(sol.g_field.at(it));
  return transition_from_fields(kernel_st, sol.grid, g_s, g_t);
}

std::vector<double> propagate_density(const TransitionDensity& p,
                                      std::span<const double> rho_s) {
  const Grid& grid = p.grid;
  if (static_cast<int>(rho_s.size()) != grid.n) {
    throw DomainError("propagate_density: density length != grid.n");
  }
  for (double v : rho_s) {
    if (v < 0.0 || !std::isfinite(v)) {
      throw DomainError("propagate_density: rho_s must be nonnegative");
    }
  }
  const VectorMap w(grid.weights.data(), grid.n);
  const Eigen::VectorXd rho = to_vector(rho_s);
  const Eigen::VectorXd out = p.values.transpose() * w.cwiseProduct(rho).matrix();
  return {out.data(), out.data() + grid.n};
}

TransitionBuilder::TransitionBuilder(Potential pot, const BridgeSolution& sol,
                                     KernelMethod method, KernelOptions opts)
    : pot_(std::move(pot)), sol_(sol), method_(method), opts_(opts) {
  if (sol_.g_field.empty()) {
    throw DomainError("TransitionBuilder: solution has no propagated fields");
  }
}

TransitionDensity TransitionBuilder::operator()(double s, double t) const {
  if (!(t > s)) throw DomainError("TransitionBuilder: requires t > s");
  const Grid& grid = sol_.grid;
  const VectorMap w(grid.weights.data(), grid.n);

  // g at t: either a mesh field or pulled back from the next mesh time.
  Eigen::VectorXd g_t;
  bool on_mesh = false;
  for (std::size_t m = 0; m < sol_.time_mesh.size(); ++m) {
    if (std::abs(sol_.time_mesh[m] - t) <= kTimeTol) {
      g_t = to_vector(sol_.g_field[m]);
      on_mesh = true;
      break;
    }
  }
  if (!on_mesh) {
    auto next = std::upper_bound(sol_.time_mesh.begin(), sol_.time_mesh.end(), t);
    if (next == sol_.time_mesh.end()) {
      throw DomainError("TransitionBuilder: t beyond the solution horizon");
    }
    const std::size_t m = static_cast<std::size_t>(next - sol_.time_mesh.begin());
    const KernelMatrix k_bridge =
        kernel_matrix(pot_, grid, t, sol_.time_mesh[m], method_, opts_);
    g_t = k_bridge.values * w.cwiseProduct(to_vector(sol_.g_field[m])).matrix();
  }

  // g at s re-derived through the same kernel that defines p, which makes
  // the rows integrate to one identically.
  const KernelMatrix k_st = kernel_matrix(pot_, grid, s, t, method_, opts_);
  const Eigen::VectorXd g_s = k_st.values * w.cwiseProduct(g_t).matrix();
  return transition_from_fields(k_st, grid, g_s, g_t);
}

}  // namespace fkbridge

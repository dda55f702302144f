#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fkbridge/errors.hpp"
#include "fkbridge/kernels.hpp"
#include "fkbridge/threads.hpp"
#include "kernel_internal.hpp"

namespace fkbridge {

namespace {

constexpr double kTimeTol = 1e-9;

std::vector<double> collect_mesh_times(std::span<const double> time_mesh,
                                       double s, double t) {
  std::vector<double> taus;
  for (double tau : time_mesh) {
    if (tau >= s - kTimeTol && tau <= t + kTimeTol) taus.push_back(tau);
  }
  std::sort(taus.begin(), taus.end());
  if (taus.size() < 2 || std::abs(taus.front() - s) > kTimeTol ||
      std::abs(taus.back() - t) > kTimeTol) {
    throw DomainError(
        "fk_kernel_parametrix: time_mesh must contain s and t (s = " +
        std::to_string(s) + ", t = " + std::to_string(t) + ")");
  }
  taus.front() = s;
  taus.back() = t;
  for (std::size_t l = 1; l < taus.size(); ++l) {
    if (!(taus[l] > taus[l - 1] + kTimeTol * 0.5)) {
      throw DomainError("fk_kernel_parametrix: time_mesh points must be "
                        "strictly increasing");
    }
  }
  return taus;
}

// The iterated space-time convolutions of the series,
//   k_n(y,s,x,t) = int_s^t dtau int dz c(z,tau) k_{n-1}(y,s,z,tau)
//                  k0(z,tau,x,t),
// discretized with grid trapezoid in z and mesh trapezoid in tau. The two
// tau endpoints concentrate either k_{n-1} or k0 into a point mass, so the
// integrand limits are inserted analytically:
//   tau = s: c(y,s) k0(y,s,x,t) for n = 1, zero for n >= 2;
//   tau = t: c(x,t) k_{n-1}(y,s,x,t).
struct SeriesBuilder {
  const Potential& pot;
  const Grid& grid;
  std::vector<double> taus;
  int side;                                // grid.n
  Eigen::VectorXd wz;                      // quadrature weights
  std::vector<Eigen::VectorXd> c_at;       // c(points, taus[l])
  std::vector<Eigen::VectorXd> wz_c;       // wz .* c_at
  bool uniform = false;
  std::vector<Eigen::MatrixXd> k0_gap;     // uniform mesh: K0 by step gap

  SeriesBuilder(const Potential& p, const Grid& g, std::vector<double> mesh)
      : pot(p), grid(g), taus(std::move(mesh)), side(g.n) {
    wz = Eigen::Map<const Eigen::VectorXd>(grid.weights.data(), side);
    const std::size_t m_count = taus.size();
    c_at.resize(m_count);
    wz_c.resize(m_count);
    for (std::size_t l = 0; l < m_count; ++l) {
      c_at[l].resize(side);
      for (int j = 0; j < side; ++j) {
        const double c = pot(grid.points[j], taus[l]);
        if (!std::isfinite(c) || std::abs(c) > 1e6) {
          throw DomainError("fk_kernel_parametrix: potential '" + pot.name() +
                            "' unbounded on the grid at (x = " +
                            std::to_string(grid.points[j]) + ", t = " +
                            std::to_string(taus[l]) + ")");
        }
        c_at[l](j) = c;
      }
      wz_c[l] = wz.cwiseProduct(c_at[l]);
    }
    const double step0 = taus[1] - taus[0];
    uniform = true;
    for (std::size_t l = 1; l + 1 < m_count; ++l) {
      if (std::abs((taus[l + 1] - taus[l]) - step0) > 1e-12) {
        uniform = false;
        break;
      }
    }
    if (uniform) {
      // Gap matrices keyed off taus[0] so the (s, t) entry is evaluated with
      // exactly the same time difference as a direct heat-kernel build; for
      // the zero potential the two constructions then agree bit for bit.
      k0_gap.resize(m_count);
      for (std::size_t g_idx = 1; g_idx < m_count; ++g_idx) {
        k0_gap[g_idx] = detail::heat_matrix(grid, taus[0], taus[g_idx]);
      }
    }
  }

  Eigen::MatrixXd k0_between(std::size_t l, std::size_t m) const {
    if (uniform) return k0_gap[m - l];
    return detail::heat_matrix(grid, taus[l], taus[m]);
  }

  double trap_weight(std::size_t l, std::size_t m) const {
    if (l == 0) return 0.5 * (taus[1] - taus[0]);
    if (l == m) return 0.5 * (taus[m] - taus[m - 1]);
    return 0.5 * (taus[l + 1] - taus[l - 1]);
  }

  /// k_0 .. k_{n_terms} at (s, t).
  std::vector<Eigen::MatrixXd> terms(int n_terms) {
    const std::size_t m_top = taus.size() - 1;
    std::vector<Eigen::MatrixXd> out;
    out.reserve(n_terms + 1);
    out.push_back(k0_between(0, m_top));

    // One generation of k_{n-1}(., s, ., taus[m]) per mesh point.
    std::vector<Eigen::MatrixXd> prev(m_top + 1), cur(m_top + 1);
    for (std::size_t m = 1; m <= m_top; ++m) prev[m] = k0_between(0, m);

    for (int n = 1; n <= n_terms; ++n) {
      parallel_for(1, static_cast<std::int64_t>(m_top) + 1,
                   [&](std::int64_t lo, std::int64_t hi) {
        Eigen::MatrixXd scaled(side, side);
        for (std::int64_t mi = lo; mi < hi; ++mi) {
          const auto m = static_cast<std::size_t>(mi);
          Eigen::MatrixXd acc =
              trap_weight(m, m) * (prev[m] * c_at[m].asDiagonal());
          if (n == 1) {
            acc.noalias() +=
                trap_weight(0, m) * (c_at[0].asDiagonal() * k0_between(0, m));
          }
          for (std::size_t l = 1; l < m; ++l) {
            scaled.noalias() = wz_c[l].asDiagonal() * k0_between(l, m);
            acc.noalias() += trap_weight(l, m) * (prev[l] * scaled);
          }
          cur[m] = std::move(acc);
        }
      });
      out.push_back(cur[m_top]);
      std::swap(prev, cur);
    }
    return out;
  }
};

SeriesBuilder make_builder(const Potential& pot, const Grid& grid,
                           std::span<const double> time_mesh, double s,
                           double t, int n_terms) {
  if (!(t > s)) {
    throw DomainError("fk_kernel_parametrix: requires t > s");
  }
  if (n_terms < 1) {
    throw DomainError("fk_kernel_parametrix: requires n_terms >= 1");
  }
  return SeriesBuilder(pot, grid, collect_mesh_times(time_mesh, s, t));
}

}  // namespace

std::vector<Eigen::MatrixXd> fk_kernel_parametrix_terms(
    const Potential& pot, const Grid& grid, std::span<const double> time_mesh,
    double s, double t, int n_terms) {
  return make_builder(pot, grid, time_mesh, s, t, n_terms).terms(n_terms);
}

KernelMatrix fk_kernel_parametrix(const Potential& pot, const Grid& grid,
                                  std::span<const double> time_mesh, double s,
                                  double t, int n_terms) {
  auto terms =
      fk_kernel_parametrix_terms(pot, grid, time_mesh, s, t, n_terms);
  KernelMatrix out;
  out.grid = grid;
  out.s = s;
  out.t = t;
  out.method = KernelMethod::parametrix;
  out.values = std::move(terms[0]);
  double sign = -1.0;
  for (int n = 1; n <= n_terms; ++n) {
    out.values += sign * terms[n];
    sign = -sign;
  }
  detail::validate_kernel_entries(out.values, grid, s, t,
                                  "parametrix kernel");
  return out;
}

}  // namespace fkbridge

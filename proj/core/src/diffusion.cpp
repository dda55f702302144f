#include "fkbridge/diffusion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "fkbridge/errors.hpp"
#include "fkbridge/threads.hpp"

namespace fkbridge {

double DriftField::at(double x, double t) const {
  // Nearest mesh time; the drift varies slowly on the default mesh and this
  // keeps the sampler allocation-free per step.
  std::size_t best = 0;
  double best_dist = std::abs(time_mesh[0] - t);
  for (std::size_t m = 1; m < time_mesh.size(); ++m) {
    const double d = std::abs(time_mesh[m] - t);
    if (d < best_dist) {
      best = m;
      best_dist = d;
    }
  }
  return interp_linear(grid, values[best], x);
}

DriftField drift_field(const BridgeSolution& sol) {
  if (sol.g_field.empty()) {
    throw DomainError("drift_field: solution has no propagated g-field");
  }
  DriftField drift;
  drift.grid = sol.grid;
  drift.time_mesh = sol.time_mesh;
  drift.values.resize(sol.g_field.size());
  std::vector<double> log_g(sol.grid.n);
  for (std::size_t m = 0; m < sol.g_field.size(); ++m) {
    for (int i = 0; i < sol.grid.n; ++i) {
      const double g = sol.g_field[m][i];
      if (!(g > 0.0)) {
        throw NumericError("drift_field: nonpositive g at mesh index " +
                           std::to_string(m));
      }
      log_g[i] = std::log(g);
    }
    drift.values[m] = gradient(sol.grid, log_g);
    for (double& v : drift.values[m]) v *= 2.0;
  }
  return drift;
}

namespace {

// Piecewise-linear CDF inverse on the grid for initial-state sampling.
class GridSampler {
 public:
  GridSampler(const Grid& grid, std::span<const double> rho)
      : grid_(grid), cdf_(grid.n, 0.0) {
    for (int i = 1; i < grid.n; ++i) {
      const double cell = 0.5 * (rho[i - 1] + rho[i]) * grid.spacing();
      if (!(cell >= 0.0) || !std::isfinite(cell)) {
        throw DomainError("sample_paths: rho0 must be nonnegative and finite");
      }
      cdf_[i] = cdf_[i - 1] + cell;
    }
    const double total = cdf_.back();
    if (!(total > 0.0)) {
      throw DomainError("sample_paths: rho0 has no mass on the grid");
    }
    for (double& c : cdf_) c /= total;
  }

  double operator()(double u) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const int cell = std::clamp(
        static_cast<int>(it - cdf_.begin()) - 1, 0, grid_.n - 2);
    const double mass = cdf_[cell + 1] - cdf_[cell];
    const double frac = mass > 0.0 ? (u - cdf_[cell]) / mass : 0.0;
    return grid_.points[cell] + frac * grid_.spacing();
  }

 private:
  const Grid& grid_;
  std::vector<double> cdf_;
};

}  // namespace

PathEnsemble sample_paths(const DriftField& drift, std::span<const double> rho0,
                          int n_paths, double dt, RngStream rng,
                          bool strict_boundary) {
  const Grid& grid = drift.grid;
  if (static_cast<int>(rho0.size()) != grid.n) {
    throw DomainError("sample_paths: rho0 length != grid.n");
  }
  if (n_paths < 1) throw DomainError("sample_paths: requires n_paths >= 1");
  if (!(dt > 0.0)) throw DomainError("sample_paths: requires dt > 0");
  double min_mesh_step = drift.time_mesh.back() - drift.time_mesh.front();
  for (std::size_t m = 1; m < drift.time_mesh.size(); ++m) {
    min_mesh_step =
        std::min(min_mesh_step, drift.time_mesh[m] - drift.time_mesh[m - 1]);
  }
  if (dt > min_mesh_step + 1e-12) {
    throw DomainError("sample_paths: dt exceeds the drift mesh spacing");
  }

  const GridSampler draw_initial(grid, rho0);
  const std::size_t n_rec = drift.time_mesh.size();

  // Substep counts per mesh interval, chosen once so every path lands on
  // the record times exactly.
  std::vector<int> substeps(n_rec - 1);
  std::vector<double> substep_dt(n_rec - 1);
  for (std::size_t m = 0; m + 1 < n_rec; ++m) {
    const double span = drift.time_mesh[m + 1] - drift.time_mesh[m];
    substeps[m] = std::max(1, static_cast<int>(std::lround(span / dt)));
    substep_dt[m] = span / substeps[m];
  }

  PathEnsemble ens;
  ens.n_paths = n_paths;
  ens.dt = dt;
  ens.record_times = drift.time_mesh;
  ens.states.resize(n_paths, static_cast<Eigen::Index>(n_rec));
  ens.seed = rng.seed();
  ens.stream_id = rng.stream_id();

  std::atomic<std::int64_t> reflections{0};
  std::atomic<std::int64_t> hit_paths{0};

  parallel_for(0, n_paths, [&](std::int64_t lo, std::int64_t hi) {
    std::int64_t local_reflections = 0;
    std::int64_t local_hit_paths = 0;
    for (std::int64_t p = lo; p < hi; ++p) {
      RngStream path_rng = rng.substream(static_cast<std::uint64_t>(p));
      double x = draw_initial(path_rng.uniform01());
      bool hit = false;
      ens.states(p, 0) = x;
      for (std::size_t m = 0; m + 1 < n_rec; ++m) {
        const double h = substep_dt[m];
        const double noise_scale = std::sqrt(2.0 * h);
        for (int k = 0; k < substeps[m]; ++k) {
          // nearest mesh time of t_k = mesh[m] + k h, resolved in integers
          const auto& slab = drift.values[2 * k <= substeps[m] ? m : m + 1];
          x += interp_linear(grid, slab, x) * h +
               noise_scale * path_rng.normal();
          while (x < grid.lo || x > grid.hi) {
            x = x < grid.lo ? 2.0 * grid.lo - x : 2.0 * grid.hi - x;
            ++local_reflections;
            hit = true;
          }
        }
        ens.states(p, static_cast<Eigen::Index>(m + 1)) = x;
      }
      if (hit) ++local_hit_paths;
    }
    reflections += local_reflections;
    hit_paths += local_hit_paths;
  });

  ens.reflection_events = reflections.load();
  ens.paths_reflected = hit_paths.load();
  const double hit_fraction =
      static_cast<double>(ens.paths_reflected) / n_paths;
  if (strict_boundary && hit_fraction > 0.01) {
    throw DomainError("sample_paths: " + std::to_string(hit_fraction * 100) +
                      "% of paths hit the grid boundary; widen the grid");
  }
  return ens;
}

namespace {

struct RowBands {
  double inside_1 = 0.0;   // int over |x-x0| <= eps of p
  double first = 0.0;      // int (x-x0) p over the ball
  double second = 0.0;     // int (x-x0)^2 p over the ball
  double tail = 0.0;       // int over |x-x0| > eps of p
};

RowBands row_bands(const Grid& grid, const Eigen::MatrixXd& p, int row,
                   double x0, double epsilon) {
  std::vector<double> f0(grid.n), f1(grid.n), f2(grid.n);
  for (int j = 0; j < grid.n; ++j) {
    const double d = grid.points[j] - x0;
    f0[j] = p(row, j);
    f1[j] = d * p(row, j);
    f2[j] = d * d * p(row, j);
  }
  RowBands bands;
  const double a = x0 - epsilon, b = x0 + epsilon;
  bands.first = quad_band(grid, f1, a, b);
  bands.second = quad_band(grid, f2, a, b);
  if (a <= grid.lo && b >= grid.hi) {
    // ball covers the grid: the escape region is empty, exactly
    bands.inside_1 = quad(grid, f0);
    bands.tail = 0.0;
  } else {
    bands.inside_1 = quad_band(grid, f0, a, b);
    bands.tail = std::max(0.0, quad(grid, f0) - bands.inside_1);
  }
  return bands;
}

void check_ladder(std::span<const double> dt_ladder) {
  if (dt_ladder.empty()) {
    throw DomainError("diagnostics: dt ladder is empty");
  }
  for (std::size_t k = 0; k < dt_ladder.size(); ++k) {
    if (!(dt_ladder[k] > 0.0)) {
      throw DomainError("diagnostics: dt ladder entries must be positive");
    }
    if (k > 0 && !(dt_ladder[k] < dt_ladder[k - 1])) {
      throw DomainError("diagnostics: dt ladder must decrease");
    }
  }
}

int grid_index_of(const Grid& grid, double x0) {
  const double pos = (x0 - grid.lo) / grid.spacing();
  const int idx = static_cast<int>(std::lround(pos));
  if (idx < 0 || idx >= grid.n ||
      std::abs(grid.points[idx] - x0) > 1e-9 * std::max(1.0, std::abs(x0))) {
    throw DomainError("probe x0 = " + std::to_string(x0) +
                      " is not a grid point");
  }
  return idx;
}

}  // namespace

LocalCharacteristics estimate_local_characteristics(
    const TransitionDensityBuilder& p_builder, double x0, double s,
    double epsilon, std::span<const double> dt_ladder) {
  if (!(epsilon > 0.0)) {
    throw DomainError("estimate_local_characteristics: requires epsilon > 0");
  }
  check_ladder(dt_ladder);
  LocalCharacteristics lc;
  lc.x0 = x0;
  lc.s = s;
  lc.epsilon = epsilon;
  lc.dt_ladder.assign(dt_ladder.begin(), dt_ladder.end());
  for (double dt : dt_ladder) {
    const TransitionDensity p = p_builder(s, s + dt);
    const int row = grid_index_of(p.grid, x0);
    const RowBands bands = row_bands(p.grid, p.values, row, x0, epsilon);
    lc.b_hat.push_back(bands.first / dt);
    lc.a_hat.push_back(bands.second / dt);
    lc.tail.push_back(bands.tail / dt);
  }
  return lc;
}

std::vector<double> dynkin_diagnostic(const TransitionDensityBuilder& p_builder,
                                      double s, double K_lo, double K_hi,
                                      double epsilon,
                                      std::span<const double> dt_ladder) {
  check_ladder(dt_ladder);
  if (!(K_lo <= K_hi)) {
    throw DomainError("dynkin_diagnostic: requires K_lo <= K_hi");
  }
  std::vector<double> out;
  for (double dt : dt_ladder) {
    const TransitionDensity p = p_builder(s, s + dt);
    if (K_lo < p.grid.lo || K_hi > p.grid.hi) {
      throw DomainError("dynkin_diagnostic: [K_lo, K_hi] outside the grid");
    }
    double sup = 0.0;
    for (int i = 0; i < p.grid.n; ++i) {
      const double y = p.grid.points[i];
      if (y < K_lo || y > K_hi) continue;
      const RowBands bands = row_bands(p.grid, p.values, i, y, epsilon);
      sup = std::max(sup, bands.tail / dt);
    }
    out.push_back(sup);
  }
  return out;
}

std::vector<double> stochastic_continuity_diagnostic(
    const TransitionDensityBuilder& p_builder, double s,
    std::span<const double> rho_s, double epsilon,
    std::span<const double> dt_ladder) {
  check_ladder(dt_ladder);
  std::vector<double> out;
  for (double dt : dt_ladder) {
    const TransitionDensity p = p_builder(s, s + dt);
    if (static_cast<int>(rho_s.size()) != p.grid.n) {
      throw DomainError(
          "stochastic_continuity_diagnostic: rho_s length != grid.n");
    }
    std::vector<double> escape(p.grid.n);
    for (int i = 0; i < p.grid.n; ++i) {
      const RowBands bands =
          row_bands(p.grid, p.values, i, p.grid.points[i], epsilon);
      escape[i] = rho_s[i] * bands.tail;
    }
    out.push_back(quad(p.grid, escape));
  }
  return out;
}

}  // namespace fkbridge

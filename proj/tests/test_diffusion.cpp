#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fkbridge/bridge.hpp"
#include "fkbridge/diffusion.hpp"
#include "fkbridge/errors.hpp"
#include "fkbridge/quantum.hpp"

using namespace fkbridge;

namespace {

double normal_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Transition densities of the plain heat process on a truncated grid,
// row-normalized the way a consistently propagated constant factor would.
TransitionDensityBuilder heat_builder(const Grid& grid) {
  return [grid](double s, double t) {
    const KernelMatrix k =
        kernel_matrix(Potential::zero(), grid, s, t, KernelMethod::heat);
    TransitionDensity p;
    p.grid = grid;
    p.s = s;
    p.t = t;
    p.values.resize(grid.n, grid.n);
    for (int i = 0; i < grid.n; ++i) {
      double mass = 0.0;
      for (int j = 0; j < grid.n; ++j) mass += grid.weights[j] * k.values(i, j);
      for (int j = 0; j < grid.n; ++j) p.values(i, j) = k.values(i, j) / mass;
    }
    p.max_row_deviation = 0.0;
    return p;
  };
}

// One moderately sized quantum bridge shared by the diffusion tests.
struct QuantumFixture {
  Grid grid = make_uniform_grid(-6.0, 6.0, 241);
  Potential pot = quantum::potential();
  KernelOptions opts;
  BoundaryData data;
  BridgeSolution sol;
  DriftField drift;

  QuantumFixture() {
    opts.n_terms = 8;
    opts.submesh_points = 5;
    data = make_boundary_data(grid, quantum::density(grid, 0.0),
                              quantum::density(grid, 1.0), 1.0);
    std::vector<KernelMatrix> tiles;
    for (int m = 0; m < 20; ++m) {
      const double a = m / 20.0;
      const double b = (m + 1) / 20.0;
      tiles.push_back(kernel_matrix(pot, grid, a, b, KernelMethod::parametrix,
                                    opts));
    }
    KernelMatrix k0T = tiles.front();
    for (std::size_t m = 1; m < tiles.size(); ++m) k0T = compose(k0T, tiles[m]);
    sol = propagate_fields(
        solve_schroedinger_system(k0T, data, 1e-10, 10000), tiles);
    drift = drift_field(sol);
  }
};

const QuantumFixture& quantum_fixture() {
  static QuantumFixture fixture;
  return fixture;
}

}  // namespace

TEST_SUITE_BEGIN("diffusion");

TEST_CASE("constant g gives zero drift") {
  BridgeSolution sol;
  sol.grid = make_uniform_grid(-2.0, 2.0, 41);
  sol.T = 1.0;
  sol.time_mesh = {0.0, 1.0};
  sol.g_field = {std::vector<double>(41, 2.5), std::vector<double>(41, 2.5)};
  sol.f_field = sol.g_field;
  const DriftField drift = drift_field(sol);
  for (const auto& slab : drift.values) {
    for (double b : slab) CHECK(b == doctest::Approx(0.0));
  }
}

TEST_CASE("quantum drift matches the closed form") {
  const auto& fx = quantum_fixture();
  const DriftField& drift = fx.drift;
  for (double t : {0.0, 0.25, 0.5, 1.0}) {
    double worst = 0.0;
    for (double x = -3.0; x <= 3.0; x += 0.25) {
      worst = std::max(worst,
                       std::abs(drift.at(x, t) - quantum::drift_b(x, t)));
    }
    CHECK(worst < 5e-2);
  }
  // at t = 1 the drift vanishes identically
  double worst_t1 = 0.0;
  for (double x = -3.0; x <= 3.0; x += 0.25) {
    worst_t1 = std::max(worst_t1, std::abs(drift.at(x, 1.0)));
  }
  CHECK(worst_t1 < 5e-3);
}

TEST_CASE("zero-drift paths have variance 2t") {
  const Grid grid = make_uniform_grid(-16.0, 16.0, 161);
  DriftField drift;
  drift.grid = grid;
  drift.time_mesh = {0.0, 0.5, 1.0};
  drift.values.assign(3, std::vector<double>(grid.n, 0.0));
  // point mass at the center cell
  std::vector<double> rho0(grid.n, 0.0);
  rho0[grid.n / 2] = 1.0 / grid.weights[grid.n / 2];

  const int n_paths = 20000;
  const PathEnsemble ens =
      sample_paths(drift, rho0, n_paths, 1e-2, RngStream(404, 0));
  CHECK(ens.paths_reflected == 0);

  double mean = 0.0;
  for (int p = 0; p < n_paths; ++p) mean += ens.states(p, 2);
  mean /= n_paths;
  double var = 0.0;
  for (int p = 0; p < n_paths; ++p) {
    const double d = ens.states(p, 2) - mean;
    var += d * d;
  }
  var /= (n_paths - 1);
  // Var X(1) = 2 exactly for this scheme; 3 standard errors of slack.
  // The initial cell has width h, variance h^2/12 of extra spread.
  const double se = 2.0 * std::sqrt(2.0 / (n_paths - 1));
  CHECK(std::abs(var - 2.0 - grid.spacing() * grid.spacing() / 12.0) <=
        3.0 * se);
}

TEST_CASE("path sampling is bit-reproducible and value-like") {
  const auto& fx = quantum_fixture();
  const PathEnsemble a =
      sample_paths(fx.drift, fx.data.rho0, 500, 5e-3, RngStream(7, 0));
  const PathEnsemble b =
      sample_paths(fx.drift, fx.data.rho0, 500, 5e-3, RngStream(7, 0));
  CHECK((a.states.array() == b.states.array()).all());
  const PathEnsemble c =
      sample_paths(fx.drift, fx.data.rho0, 500, 5e-3, RngStream(8, 0));
  CHECK(!(a.states.array() == c.states.array()).all());
}

TEST_CASE("initial states follow rho0 (chi-square, 20 equal-mass bins)") {
  const auto& fx = quantum_fixture();
  const int n_paths = 50000;
  const PathEnsemble ens =
      sample_paths(fx.drift, fx.data.rho0, n_paths, 0.05, RngStream(1234, 0));

  // bin edges at the quantiles of the grid CDF actually being sampled
  const Grid& g = fx.grid;
  std::vector<double> cdf(g.n, 0.0);
  for (int i = 1; i < g.n; ++i) {
    cdf[i] = cdf[i - 1] +
             0.5 * (fx.data.rho0[i - 1] + fx.data.rho0[i]) * g.spacing();
  }
  for (double& c : cdf) c /= cdf.back();
  const int bins = 20;
  std::vector<double> edges(bins + 1);
  edges[0] = g.lo;
  edges[bins] = g.hi;
  for (int b = 1; b < bins; ++b) {
    const double target = static_cast<double>(b) / bins;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    const int idx = static_cast<int>(it - cdf.begin());
    const double frac = (target - cdf[idx - 1]) / (cdf[idx] - cdf[idx - 1]);
    edges[b] = g.points[idx - 1] + frac * g.spacing();
  }
  std::vector<int> counts(bins, 0);
  for (int p = 0; p < n_paths; ++p) {
    const double x = ens.states(p, 0);
    const int b = std::clamp(
        static_cast<int>(std::upper_bound(edges.begin(), edges.end(), x) -
                         edges.begin()) - 1,
        0, bins - 1);
    ++counts[b];
  }
  const double expected = static_cast<double>(n_paths) / bins;
  double stat = 0.0;
  for (int b = 0; b < bins; ++b) {
    stat += (counts[b] - expected) * (counts[b] - expected) / expected;
  }
  // chi-square(19) quantile at p = 0.001
  CHECK(stat < 43.8202);
}

TEST_CASE("narrow grids escalate boundary hits in strict mode") {
  const Grid grid = make_uniform_grid(-0.5, 0.5, 21);
  DriftField drift;
  drift.grid = grid;
  drift.time_mesh = {0.0, 0.5, 1.0};
  drift.values.assign(3, std::vector<double>(grid.n, 0.0));
  std::vector<double> rho0(grid.n, 1.0);
  const PathEnsemble loose =
      sample_paths(drift, rho0, 200, 1e-2, RngStream(5, 0), false);
  CHECK(loose.paths_reflected > 2);  // variance 2 vs box half-width 0.5
  CHECK_THROWS_AS(sample_paths(drift, rho0, 200, 1e-2, RngStream(5, 0), true),
                  DomainError);
}

TEST_CASE("sampler preconditions") {
  const auto& fx = quantum_fixture();
  CHECK_THROWS_AS(
      sample_paths(fx.drift, fx.data.rho0, 0, 1e-2, RngStream()), DomainError);
  CHECK_THROWS_AS(
      sample_paths(fx.drift, fx.data.rho0, 10, 0.2, RngStream()), DomainError);
  CHECK_THROWS_AS(
      sample_paths(fx.drift, std::vector<double>{1.0}, 10, 1e-2, RngStream()),
      DomainError);
}

TEST_CASE("heat process local characteristics: b -> 0, a -> 2, tail -> 0") {
  const Grid grid = make_uniform_grid(-10.0, 10.0, 401);
  const auto builder = heat_builder(grid);
  const std::vector<double> ladder{0.1, 0.05, 0.02, 0.01, 0.005};
  const LocalCharacteristics lc =
      estimate_local_characteristics(builder, 0.5, 0.0, 0.5, ladder);

  for (std::size_t k = 0; k < ladder.size(); ++k) {
    CHECK(std::abs(lc.b_hat[k]) < 1e-10);  // symmetric rows
    CHECK(lc.tail[k] >= 0.0);
    // Gaussian tail oracle with one mesh cell of cut slack dominates
    const double oracle = 2.0 / ladder[k] *
        normal_tail((0.5 - grid.spacing()) / std::sqrt(2.0 * ladder[k]));
    CHECK(lc.tail[k] <= oracle + 1e-12);
  }
  CHECK(lc.a_hat.back() == doctest::Approx(2.0).epsilon(0.05));
  CHECK(lc.tail.back() < 1e-3);
  for (std::size_t k = 1; k < ladder.size(); ++k) {
    CHECK(lc.tail[k] < lc.tail[k - 1]);
    CHECK(std::abs(lc.a_hat[k] - 2.0) <=
          std::abs(lc.a_hat[k - 1] - 2.0) + 1e-12);
  }
}

TEST_CASE("quantum local characteristics at a probe") {
  const auto& fx = quantum_fixture();
  const TransitionBuilder builder(fx.pot, fx.sol, KernelMethod::parametrix,
                                  fx.opts);
  const std::vector<double> ladder{0.1, 0.05, 0.02, 0.01, 0.005};
  const LocalCharacteristics lc =
      estimate_local_characteristics(builder, 1.0, 0.25, 0.5, ladder);
  CHECK(lc.a_hat.back() > 1.9);
  CHECK(lc.a_hat.back() < 2.1);
  // b(1, 0.25) = -(0.75/1.0625) = -0.70588...
  CHECK(std::abs(lc.b_hat.back() - quantum::drift_b(1.0, 0.25)) < 5e-2);
  CHECK(lc.tail.back() < 1e-3);
}

TEST_CASE("dynkin diagnostic on the heat process") {
  const Grid grid = make_uniform_grid(-10.0, 10.0, 401);
  const auto builder = heat_builder(grid);
  const std::vector<double> ladder{0.1, 0.05, 0.02, 0.01};
  const std::vector<double> seq =
      dynkin_diagnostic(builder, 0.0, -2.0, 2.0, 1.0, ladder);
  REQUIRE(seq.size() == 4);
  for (std::size_t k = 1; k < seq.size(); ++k) CHECK(seq[k] < seq[k - 1]);
  CHECK(seq.back() < 1e-3);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const double oracle = 2.0 / ladder[k] *
        normal_tail((1.0 - grid.spacing()) / std::sqrt(2.0 * ladder[k]));
    CHECK(seq[k] <= oracle + 1e-12);
  }
}

TEST_CASE("dynkin diagnostic with epsilon beyond the grid span is zero") {
  const Grid grid = make_uniform_grid(-3.0, 3.0, 61);
  const auto builder = heat_builder(grid);
  const std::vector<double> ladder{0.1, 0.05};
  for (double v :
       dynkin_diagnostic(builder, 0.0, -1.0, 1.0, 50.0, ladder)) {
    CHECK(v == 0.0);
  }
}

TEST_CASE("stochastic continuity of the heat process matches the tail formula") {
  const Grid grid = make_uniform_grid(-8.0, 8.0, 1281);
  const auto builder = heat_builder(grid);
  std::vector<double> rho(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    rho[i] = std::exp(-0.5 * grid.points[i] * grid.points[i]) /
             std::sqrt(2.0 * std::numbers::pi);
  }
  const std::vector<double> ladder{0.1, 0.05, 0.02, 0.01, 0.005};
  const std::vector<double> seq =
      stochastic_continuity_diagnostic(builder, 0.0, rho, 0.5, ladder);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const double oracle = 2.0 * normal_tail(0.5 / std::sqrt(2.0 * ladder[k]));
    CHECK(std::abs(seq[k] - oracle) < 1e-4);
    if (k > 0) CHECK(seq[k] < seq[k - 1]);
  }
}

TEST_CASE("drift from paths agrees with the field (conditioned one step)") {
  const auto& fx = quantum_fixture();
  // all paths start at x0; one Euler step of size dt
  const double x0 = 1.0, s = 0.25, dt = 0.005;
  std::vector<double> spike(fx.grid.n, 0.0);
  const int idx = static_cast<int>(std::lround((x0 - fx.grid.lo) / fx.grid.spacing()));
  spike[idx] = 1.0 / fx.grid.weights[idx];

  DriftField shifted = fx.drift;  // reuse the drift, start the clock at s
  const int n_paths = 40000;
  RngStream rng(87, 0);
  double mean_disp = 0.0, var_disp = 0.0;
  std::vector<double> disps(n_paths);
  for (int p = 0; p < n_paths; ++p) {
    RngStream pr = rng.substream(p);
    const double step = shifted.at(x0, s) * dt +
                        std::sqrt(2.0 * dt) * pr.normal();
    disps[p] = step;
    mean_disp += step;
  }
  mean_disp /= n_paths;
  for (double d : disps) var_disp += (d - mean_disp) * (d - mean_disp);
  var_disp /= (n_paths - 1);
  const double se = std::sqrt(var_disp / n_paths);
  // quadrature route to the same number
  const TransitionBuilder builder(fx.pot, fx.sol, KernelMethod::parametrix,
                                  fx.opts);
  const LocalCharacteristics lc = estimate_local_characteristics(
      builder, x0, s, 0.5, std::vector<double>{dt});
  CHECK(std::abs(mean_disp / dt - lc.b_hat[0]) <= 3.0 * se / dt + 5e-2);
}

TEST_SUITE_END();

#include <cmath>
#include <vector>

#include "doctest.h"
#include "fkbridge/errors.hpp"
#include "fkbridge/kernels.hpp"
#include "fkbridge/quantum.hpp"

using namespace fkbridge;

namespace {

std::vector<double> mesh(double a, double b, int points) {
  std::vector<double> m(points);
  for (int i = 0; i < points; ++i) {
    m[i] = a + (b - a) * i / static_cast<double>(points - 1);
  }
  m.front() = a;
  m.back() = b;
  return m;
}

// Entries whose pinned-path mass stays inside the grid; closed-form
// free-space comparisons are only meaningful there.
bool supported(const Grid& g, int i, int j, double interval) {
  return path_confined(g, g.points[i], g.points[j], interval);
}

double max_rel_error_supported(const KernelMatrix& got,
                               const Eigen::MatrixXd& expected) {
  double worst = -1.0;
  for (int i = 0; i < got.grid.n; ++i) {
    for (int j = 0; j < got.grid.n; ++j) {
      if (!supported(got.grid, i, j, got.interval())) continue;
      worst = std::max(worst, std::abs(got.values(i, j) - expected(i, j)) /
                                  expected(i, j));
    }
  }
  REQUIRE(worst >= 0.0);
  return worst;
}

}  // namespace

TEST_SUITE_BEGIN("parametrix");

TEST_CASE("zero potential: every correction term vanishes, bitwise") {
  const Grid g = make_uniform_grid(-4.0, 4.0, 101);
  const KernelMatrix heat =
      kernel_matrix(Potential::zero(), g, 0.0, 0.2, KernelMethod::heat);
  for (int n_terms : {1, 8}) {
    const KernelMatrix par = fk_kernel_parametrix(
        Potential::zero(), g, mesh(0.0, 0.2, 5), 0.0, 0.2, n_terms);
    CHECK((par.values.array() == heat.values.array()).all());
  }
  // dispatch wrapper, single split
  const KernelMatrix via_matrix = kernel_matrix(
      Potential::zero(), g, 0.0, 0.2, KernelMethod::parametrix);
  CHECK((via_matrix.values.array() == heat.values.array()).all());
}

TEST_CASE("constant potential: closed-form oracle exp(-c dt) k0") {
  const Grid g = make_uniform_grid(-6.0, 6.0, 121);
  const double dt = 0.5;
  const KernelMatrix par = fk_kernel_parametrix(
      Potential::constant(1.0), g, mesh(0.0, dt, 26), 0.0, dt, 6);
  Eigen::MatrixXd expected(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      expected(i, j) = std::exp(-dt) * heat_kernel(g.points[i], 0.0,
                                                   g.points[j], dt);
    }
  }
  CHECK(max_rel_error_supported(par, expected) < 1e-4);
}

TEST_CASE("constant potential: terms reproduce the Taylor series term by term") {
  const Grid g = make_uniform_grid(-6.0, 6.0, 121);
  const double kappa = 1.3, dt = 0.4;
  const auto terms = fk_kernel_parametrix_terms(
      Potential::constant(kappa), g, mesh(0.0, dt, 65), 0.0, dt, 6);
  REQUIRE(terms.size() == 7);
  double factorial = 1.0;
  for (int n = 0; n <= 6; ++n) {
    if (n > 0) factorial *= n;
    const double coeff = std::pow(kappa * dt, n) / factorial;
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i) {
      for (int j = 0; j < g.n; ++j) {
        if (!supported(g, i, j, dt)) continue;
        const double reference =
            coeff * heat_kernel(g.points[i], 0.0, g.points[j], dt);
        worst = std::max(worst, std::abs(terms[n](i, j) - reference) /
                                    (reference > 0 ? reference : 1.0));
      }
    }
    // time-trapezoid error grows with the term order; 1/4 of what a
    // half-as-fine mesh measures
    CHECK(worst < 5e-3);
  }
}

TEST_CASE("series divergence surfaces as a convergence error") {
  const Grid g = make_uniform_grid(-2.0, 2.0, 41);
  CHECK_THROWS_AS(fk_kernel_parametrix(Potential::constant(100.0), g,
                                       mesh(0.0, 0.25, 6), 0.0, 0.25, 1),
                  ConvergenceError);
}

TEST_CASE("preconditions") {
  const Grid g = make_uniform_grid(-2.0, 2.0, 41);
  const auto m = mesh(0.0, 0.5, 11);
  CHECK_THROWS_AS(
      fk_kernel_parametrix(Potential::zero(), g, m, 0.5, 0.5, 4), DomainError);
  CHECK_THROWS_AS(
      fk_kernel_parametrix(Potential::zero(), g, m, 0.0, 0.5, 0), DomainError);
  // s, t must be mesh members
  CHECK_THROWS_AS(
      fk_kernel_parametrix(Potential::zero(), g, m, 0.0, 0.43, 4), DomainError);
  // unbounded potential on the grid
  const Potential wild = Potential::from_function(
      "wild", [](double x, double) { return std::exp(10.0 * x * x); }, 0.0,
      false);
  CHECK_THROWS_AS(
      fk_kernel_parametrix(wild, g, m, 0.0, 0.5, 2), DomainError);
}

TEST_CASE("quantum potential: parametrix agrees with Monte Carlo at probes") {
  const Grid g = make_uniform_grid(-8.0, 8.0, 321);
  const Potential pot = quantum::potential();
  // the construction for this interval: short splits composed, with a time
  // quadrature fine enough to sit below the Monte Carlo noise floor
  KernelOptions opts;
  opts.n_terms = 8;
  opts.submesh_points = 9;
  const KernelMatrix par =
      kernel_matrix(pot, g, 0.0, 0.25, KernelMethod::parametrix, opts);
  // the raw series on the full interval carries only its own coarser
  // time-quadrature error relative to the composed construction
  const KernelMatrix raw =
      fk_kernel_parametrix(pot, g, mesh(0.0, 0.25, 21), 0.0, 0.25, 8);
  const double h = g.spacing();
  int probe_id = 0;
  for (auto [y, x] : {std::pair{0.0, 0.0}, {1.0, -1.0}, {-0.5, 1.5},
                      {2.0, 0.0}, {0.5, 0.5}}) {
    const int i = static_cast<int>(std::lround((y - g.lo) / h));
    const int j = static_cast<int>(std::lround((x - g.lo) / h));
    REQUIRE(g.points[i] == doctest::Approx(y).epsilon(1e-12));
    const McEstimate mc = fk_kernel_mc(pot, y, 0.0, x, 0.25, 1000000, 64,
                                       RngStream(31, probe_id * 1000000));
    CHECK(std::abs(par.values(i, j) - mc.value) <= 3.0 * mc.std_error);
    CHECK(std::abs(raw.values(i, j) - par.values(i, j)) <=
          5e-4 * par.values(i, j));
    ++probe_id;
  }
}

TEST_CASE("chapman-kolmogorov: heat kernels on a wide grid") {
  const Grid g = make_uniform_grid(-10.0, 10.0, 401);
  const Potential zero = Potential::zero();
  const KernelMatrix k_sr = kernel_matrix(zero, g, 0.0, 0.5, KernelMethod::heat);
  const KernelMatrix k_rt = kernel_matrix(zero, g, 0.5, 1.0, KernelMethod::heat);
  const KernelMatrix k_st = kernel_matrix(zero, g, 0.0, 1.0, KernelMethod::heat);
  CHECK(chapman_kolmogorov_residual(k_sr, k_rt, k_st) < 1e-6);
}

TEST_CASE("chapman-kolmogorov: constant-potential parametrix") {
  const Grid g = make_uniform_grid(-10.0, 10.0, 201);
  const Potential one = Potential::constant(1.0);
  KernelOptions opts;
  opts.n_terms = 6;
  opts.submesh_points = 9;
  const auto build = [&](double a, double b) {
    return kernel_matrix(one, g, a, b, KernelMethod::parametrix, opts);
  };
  // aligned composition point
  CHECK(chapman_kolmogorov_residual(build(0.0, 0.5), build(0.5, 1.0),
                                    build(0.0, 1.0)) < 1e-4);
  // misaligned composition point exercises genuinely different quadratures
  CHECK(chapman_kolmogorov_residual(build(0.0, 0.3), build(0.3, 1.0),
                                    build(0.0, 1.0)) < 1e-4);
}

TEST_CASE("chapman-kolmogorov residual decreases under grid refinement") {
  const Potential zero = Potential::zero();
  std::vector<double> residuals;
  for (int n : {11, 15, 21}) {
    const Grid g = make_uniform_grid(-2.0, 2.0, n);
    const KernelMatrix k_sr =
        kernel_matrix(zero, g, 0.0, 0.05, KernelMethod::heat);
    const KernelMatrix k_rt =
        kernel_matrix(zero, g, 0.05, 0.1, KernelMethod::heat);
    const KernelMatrix k_st =
        kernel_matrix(zero, g, 0.0, 0.1, KernelMethod::heat);
    residuals.push_back(chapman_kolmogorov_residual(k_sr, k_rt, k_st));
  }
  CHECK(residuals[1] < residuals[0]);
  CHECK(residuals[2] < residuals[1]);
}

TEST_CASE("chapman-kolmogorov rejects mismatched inputs") {
  const Potential zero = Potential::zero();
  const Grid g = make_uniform_grid(-2.0, 2.0, 21);
  const Grid g2 = make_uniform_grid(-2.0, 2.0, 31);
  const KernelMatrix a = kernel_matrix(zero, g, 0.0, 0.5, KernelMethod::heat);
  const KernelMatrix b = kernel_matrix(zero, g2, 0.5, 1.0, KernelMethod::heat);
  const KernelMatrix c = kernel_matrix(zero, g, 0.0, 1.0, KernelMethod::heat);
  CHECK_THROWS_AS(chapman_kolmogorov_residual(a, b, c), DomainError);
  const KernelMatrix wrong_r = kernel_matrix(zero, g, 0.4, 1.0, KernelMethod::heat);
  CHECK_THROWS_AS(chapman_kolmogorov_residual(a, wrong_r, c), DomainError);
}

TEST_CASE("compose chains intervals") {
  const Grid g = make_uniform_grid(-6.0, 6.0, 101);
  const Potential zero = Potential::zero();
  const KernelMatrix a = kernel_matrix(zero, g, 0.0, 0.3, KernelMethod::heat);
  const KernelMatrix b = kernel_matrix(zero, g, 0.3, 0.7, KernelMethod::heat);
  const KernelMatrix ab = compose(a, b);
  CHECK(ab.s == 0.0);
  CHECK(ab.t == 0.7);
  const KernelMatrix direct = kernel_matrix(zero, g, 0.0, 0.7, KernelMethod::heat);
  // interior entries reproduce the direct kernel to quadrature accuracy
  const int mid = g.n / 2;
  CHECK(ab.values(mid, mid) ==
        doctest::Approx(direct.values(mid, mid)).epsilon(1e-10));
  CHECK_THROWS_AS(compose(b, a), DomainError);
}

TEST_SUITE_END();

#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fkbridge/errors.hpp"
#include "fkbridge/grid.hpp"
#include "fkbridge/rng.hpp"

using namespace fkbridge;

TEST_SUITE_BEGIN("grid");

TEST_CASE("uniform grid basics") {
  const Grid g = make_uniform_grid(-1.0, 1.0, 3);
  CHECK(g.points == std::vector<double>{-1.0, 0.0, 1.0});
  CHECK(g.weights == std::vector<double>{0.5, 1.0, 0.5});

  const Grid g2 = make_uniform_grid(0.0, 10.0, 11);
  CHECK(g2.spacing() == doctest::Approx(1.0));
  double wsum = 0.0;
  for (double w : g2.weights) wsum += w;
  CHECK(wsum == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(g2.points.front() == 0.0);
  CHECK(g2.points.back() == 10.0);
}

TEST_CASE("uniform grid rejects bad arguments") {
  CHECK_THROWS_AS(make_uniform_grid(0.0, 1.0, 2), DomainError);
  CHECK_THROWS_AS(make_uniform_grid(1.0, 1.0, 5), DomainError);
  CHECK_THROWS_AS(make_uniform_grid(2.0, 1.0, 5), DomainError);
}

TEST_CASE("quad on closed forms") {
  const Grid g = make_uniform_grid(-1.0, 1.0, 3);
  CHECK(quad(g, std::vector<double>{1.0, 1.0, 1.0}) == doctest::Approx(2.0));

  // x^2 on [0,1]: antiderivative gives exactly 1/3.
  const Grid g2 = make_uniform_grid(0.0, 1.0, 101);
  std::vector<double> sq(g2.n);
  for (int i = 0; i < g2.n; ++i) sq[i] = g2.points[i] * g2.points[i];
  CHECK(std::abs(quad(g2, sq) - 1.0 / 3.0) < 1e-4);

  // standard normal mass on [-5, 5]: erf(5/sqrt(2)) = 0.9999994266...
  const Grid g3 = make_uniform_grid(-5.0, 5.0, 501);
  std::vector<double> pdf(g3.n);
  for (int i = 0; i < g3.n; ++i) {
    pdf[i] = std::exp(-0.5 * g3.points[i] * g3.points[i]) /
             std::sqrt(2.0 * std::numbers::pi);
  }
  const double mass = quad(g3, pdf);
  CHECK(std::abs(mass - 1.0) < 1e-6);
  CHECK(std::abs(mass - std::erf(5.0 / std::sqrt(2.0))) < 1e-8);
}

TEST_CASE("quad rejects bad input") {
  const Grid g = make_uniform_grid(0.0, 1.0, 5);
  CHECK_THROWS_AS(quad(g, std::vector<double>{1.0, 2.0}), DomainError);
  std::vector<double> bad(g.n, 1.0);
  bad[2] = std::nan("");
  CHECK_THROWS_AS(quad(g, bad), NumericError);
}

TEST_CASE("quad is linear and monotone") {
  const Grid g = make_uniform_grid(-2.0, 3.0, 37);
  RngStream rng(99, 0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> u(g.n), v(g.n), combo(g.n);
    const double a = 4.0 * rng.uniform01() - 2.0;
    const double b = 4.0 * rng.uniform01() - 2.0;
    for (int i = 0; i < g.n; ++i) {
      u[i] = rng.normal();
      v[i] = rng.normal();
      combo[i] = a * u[i] + b * v[i];
    }
    CHECK(quad(g, combo) ==
          doctest::Approx(a * quad(g, u) + b * quad(g, v)).epsilon(1e-12));

    std::vector<double> nonneg(g.n);
    for (int i = 0; i < g.n; ++i) nonneg[i] = std::abs(u[i]);
    CHECK(quad(g, nonneg) >= 0.0);
  }
}

TEST_CASE("quad_band cuts cells at the endpoints") {
  const Grid g = make_uniform_grid(0.0, 1.0, 101);
  std::vector<double> ones(g.n, 1.0);
  CHECK(quad_band(g, ones, 0.105, 0.895) == doctest::Approx(0.79).epsilon(1e-12));
  CHECK(quad_band(g, ones, -5.0, 5.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(quad_band(g, ones, 0.7, 0.3) == 0.0);

  // linear integrand: piecewise-linear treatment is exact
  std::vector<double> lin(g.n);
  for (int i = 0; i < g.n; ++i) lin[i] = 2.0 * g.points[i] + 1.0;
  const double a = 0.123, b = 0.877;
  const double exact = (b * b - a * a) + (b - a);
  CHECK(quad_band(g, lin, a, b) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("gradient stencils") {
  const Grid g = make_uniform_grid(-1.0, 1.0, 201);

  // identity field: slope one everywhere, endpoints included
  auto didentity = gradient(g, g.points);
  for (double d : didentity) CHECK(d == doctest::Approx(1.0).epsilon(1e-13));

  // x^2: both the central and the one-sided stencils are exact on quadratics
  std::vector<double> sq(g.n);
  for (int i = 0; i < g.n; ++i) sq[i] = g.points[i] * g.points[i];
  auto dsq = gradient(g, sq);
  for (int i = 0; i < g.n; ++i) {
    CHECK(std::abs(dsq[i] - 2.0 * g.points[i]) < 1e-3);
    CHECK(std::abs(dsq[i] - 2.0 * g.points[i]) < 1e-11);
  }

  auto dconst = gradient(g, std::vector<double>(g.n, 3.7));
  for (double d : dconst) CHECK(d == doctest::Approx(0.0));

  CHECK_THROWS_AS(gradient(g, std::vector<double>{1.0}), DomainError);
}

TEST_CASE("gradient of a linear field equals its slope everywhere") {
  const Grid g = make_uniform_grid(2.0, 7.0, 23);
  std::vector<double> lin(g.n);
  for (int i = 0; i < g.n; ++i) lin[i] = -4.5 * g.points[i] + 2.0;
  for (double d : gradient(g, lin)) {
    CHECK(d == doctest::Approx(-4.5).epsilon(1e-12));
  }
}

TEST_CASE("interp_linear") {
  const Grid g = make_uniform_grid(0.0, 2.0, 21);
  std::vector<double> v(g.n);
  for (int i = 0; i < g.n; ++i) v[i] = std::sin(g.points[i]);

  for (int k : {0, 7, 20}) {
    CHECK(interp_linear(g, v, g.points[k]) == v[k]);  // exact at nodes
  }
  const double mid = 0.5 * (g.points[3] + g.points[4]);
  CHECK(interp_linear(g, v, mid) == doctest::Approx(0.5 * (v[3] + v[4])));

  CHECK_THROWS_AS(interp_linear(g, v, 2.1), DomainError);
  CHECK_THROWS_AS(interp_linear(g, v, -0.001), DomainError);
}

TEST_SUITE_END();

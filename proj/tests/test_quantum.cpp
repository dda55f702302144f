#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fkbridge/grid.hpp"
#include "fkbridge/quantum.hpp"
#include "fkbridge/rng.hpp"
#include "support/dual.hpp"

using namespace fkbridge;
namespace q = fkbridge::quantum;

TEST_SUITE_BEGIN("quantum");

TEST_CASE("density values and normalization") {
  CHECK(q::rho(0.0, 0.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-12));
  CHECK(q::rho(0.0, 1.0) ==
        doctest::Approx(1.0 / std::sqrt(4.0 * std::numbers::pi)).epsilon(1e-12));

  const Grid g = make_uniform_grid(-10.0, 10.0, 801);
  for (double t : {0.0, 0.5, 1.0}) {
    CHECK(std::abs(quad(g, q::density(g, t)) - 1.0) < 1e-8);
  }
}

TEST_CASE("theta values and the density factorization") {
  const double expected = std::pow(2.0 * std::numbers::pi, -0.25);
  CHECK(q::theta(0.0, 0.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(q::theta_star(0.0, 0.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(q::theta(0.0, 0.0) * q::theta_star(0.0, 0.0) ==
        doctest::Approx(q::rho(0.0, 0.0)).epsilon(1e-12));

  RngStream rng(7, 0);
  for (int i = 0; i < 100; ++i) {
    const double x = 8.0 * rng.uniform01() - 4.0;
    const double t = rng.uniform01();
    CHECK(q::theta(x, t) * q::theta_star(x, t) ==
          doctest::Approx(q::rho(x, t)).epsilon(1e-12));
    // Madelung split: theta = exp(R+S), theta* = exp(R-S)
    CHECK(q::theta(x, t) ==
          doctest::Approx(std::exp(q::madelung_R(x, t) + q::madelung_S(x, t)))
              .epsilon(1e-12));
    CHECK(q::theta_star(x, t) ==
          doctest::Approx(std::exp(q::madelung_R(x, t) - q::madelung_S(x, t)))
              .epsilon(1e-12));
    CHECK(q::psi_modulus(x, t) * q::psi_modulus(x, t) ==
          doctest::Approx(q::rho(x, t)).epsilon(1e-12));
  }
}

TEST_CASE("theta solves its backward equation (finite differences)") {
  // d_t theta = -Lap theta + c theta, checked on a fine stencil
  const double h = 1e-4;
  for (double x : {-3.0, -1.0, 0.0, 0.7, 2.5}) {
    for (double t : {0.1, 0.4, 0.9}) {
      const double dtheta_dt = (q::theta(x, t + h) - q::theta(x, t - h)) / (2 * h);
      const double lap =
          (q::theta(x + h, t) - 2 * q::theta(x, t) + q::theta(x - h, t)) /
          (h * h);
      const double residual =
          dtheta_dt - (-lap + q::potential_c(x, t) * q::theta(x, t));
      CHECK(std::abs(residual) < 1e-5);
    }
  }
}

TEST_CASE("theta_star solves the forward equation (finite differences)") {
  const double h = 1e-4;
  for (double x : {-2.0, 0.0, 1.3, 3.0}) {
    for (double t : {0.2, 0.6, 0.8}) {
      const double d_dt =
          (q::theta_star(x, t + h) - q::theta_star(x, t - h)) / (2 * h);
      const double lap = (q::theta_star(x + h, t) - 2 * q::theta_star(x, t) +
                          q::theta_star(x - h, t)) /
                         (h * h);
      const double residual =
          d_dt - (lap - q::potential_c(x, t) * q::theta_star(x, t));
      CHECK(std::abs(residual) < 1e-5);
    }
  }
}

TEST_CASE("drift closed form") {
  CHECK(q::drift_b(2.0, 0.0) == doctest::Approx(-2.0).epsilon(1e-15));
  for (double x : {-5.0, -0.3, 0.0, 1.0, 4.2}) {
    CHECK(q::drift_b(x, 1.0) == 0.0);
  }
}

TEST_CASE("drift equals 2 d/dx log theta (dual-number oracle)") {
  RngStream rng(11, 0);
  for (int i = 0; i < 100; ++i) {
    const double x = 8.0 * rng.uniform01() - 4.0;
    const double t = rng.uniform01();
    const testsupport::Dual lt =
        q::log_theta_generic(testsupport::Dual(x, 1.0), testsupport::Dual(t));
    CHECK(std::abs(2.0 * lt.d - q::drift_b(x, t)) < 1e-12);
  }
}

TEST_CASE("hand-coded partials match the dual-number oracle") {
  RngStream rng(12, 0);
  for (int i = 0; i < 100; ++i) {
    const double x = 8.0 * rng.uniform01() - 4.0;
    const double t = rng.uniform01();
    const testsupport::Dual lt =
        q::log_theta_generic(testsupport::Dual(x), testsupport::Dual(t, 1.0));
    CHECK(std::abs(lt.d - q::dt_log_theta(x, t)) < 1e-12);

    const double h = 1e-6;
    const double db_fd = (q::drift_b(x + h, t) - q::drift_b(x - h, t)) / (2 * h);
    CHECK(std::abs(db_fd - q::dx_drift_b(x, t)) < 1e-8);
  }
}

TEST_CASE("potential values and curvature identity") {
  CHECK(q::potential_c(0.0, 0.0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(q::potential_c(1.0, 0.0) == doctest::Approx(-0.5).epsilon(1e-15));

  // c = 2 (sqrt rho)'' / sqrt rho, by finite differences on rho
  const double h = 1e-4;
  for (double x : {-3.0, -0.5, 0.0, 1.8}) {
    for (double t : {0.0, 0.3, 1.0}) {
      const double s0 = std::sqrt(q::rho(x, t));
      const double sp = std::sqrt(q::rho(x + h, t));
      const double sm = std::sqrt(q::rho(x - h, t));
      const double lap = (sp - 2 * s0 + sm) / (h * h);
      CHECK(std::abs(2.0 * lap / s0 - q::potential_c(x, t)) < 1e-5);
    }
  }

  // lower bound c >= -1
  RngStream rng(13, 0);
  for (int i = 0; i < 1000; ++i) {
    const double x = 16.0 * rng.uniform01() - 8.0;
    const double t = rng.uniform01();
    CHECK(q::potential_c(x, t) >= -1.0);
  }
}

TEST_CASE("drift-potential identity selects the half-bracket reading") {
  using Variant = q::DriftPotentialVariant;
  // at the origin: dt log theta = -1/2, db/dx = -1, b = 0 compose to c = -1
  CHECK(q::dt_log_theta(0.0, 0.0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(q::dx_drift_b(0.0, 0.0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(q::drift_potential_residual(0.0, 0.0, Variant::half_bracket) < 1e-10);
  CHECK(q::drift_potential_residual(0.0, 0.0, Variant::leading_two) >= 0.4);

  RngStream rng(14, 0);
  double worst = 0.0;
  double wrong_best = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = 8.0 * rng.uniform01() - 4.0;
    const double t = rng.uniform01();
    worst = std::max(worst,
                     q::drift_potential_residual(x, t, Variant::half_bracket));
    wrong_best = std::max(
        wrong_best, q::drift_potential_residual(x, t, Variant::leading_two));
  }
  CHECK(worst < 1e-9);
  CHECK(wrong_best >= 0.1);
}

TEST_CASE("potential wrapper bounds hold on a grid sample") {
  const Grid g = make_uniform_grid(-8.0, 8.0, 161);
  const Potential pot = q::potential();
  CHECK(pot.lower_bound() == doctest::Approx(1.0));
  CHECK(pot.time_dependent());
  const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
  CHECK_NOTHROW(pot.check_bounds(g, times));
  // closed-form box bound: c_plus peaks at the outer corner, t = 0
  const double expected = q::potential_c(8.0, 0.0);
  CHECK(pot.positive_part_bound(Box{-8.0, 8.0, 0.0, 1.0}) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_SUITE_END();

#include "fkbridge/quantum.hpp"

#include <algorithm>
#include <cmath>

namespace fkbridge::quantum {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double rho(double x, double t) {
  const double s2 = 1.0 + t * t;
  return std::exp(-x * x / (2.0 * s2)) / std::sqrt(kTwoPi * s2);
}

double madelung_R(double x, double t) {
  const double s2 = 1.0 + t * t;
  return -0.25 * std::log(kTwoPi * s2) - x * x / (4.0 * s2);
}

double madelung_S(double x, double t) {
  const double s2 = 1.0 + t * t;
  return x * x * t / (4.0 * s2) - 0.5 * std::atan(t);
}

double psi_modulus(double x, double t) { return std::exp(madelung_R(x, t)); }

double psi_phase(double x, double t) { return madelung_S(x, t); }

double theta(double x, double t) {
  return std::exp(log_theta_generic(x, t));
}

double theta_star(double x, double t) {
  const double s2 = 1.0 + t * t;
  return std::exp(-0.25 * std::log(kTwoPi * s2) -
                  (x * x / 4.0) * (1.0 + t) / s2 + 0.5 * std::atan(t));
}

double drift_b(double x, double t) {
  return -(1.0 - t) * x / (1.0 + t * t);
}

double potential_c(double x, double t) {
  const double s2 = 1.0 + t * t;
  return x * x / (2.0 * s2 * s2) - 1.0 / s2;
}

double dt_log_theta(double x, double t) {
  const double s2 = 1.0 + t * t;
  return -(t + 1.0) / (2.0 * s2) -
         (x * x / 4.0) * (t * t - 2.0 * t - 1.0) / (s2 * s2);
}

double dx_drift_b(double /*x*/, double t) {
  return -(1.0 - t) / (1.0 + t * t);
}

double drift_potential_residual(double x, double t, DriftPotentialVariant v) {
  const double b = drift_b(x, t);
  const double core = dt_log_theta(x, t) + 0.5 * (0.5 * b * b + dx_drift_b(x, t));
  const double reconstructed =
      v == DriftPotentialVariant::half_bracket ? core : 2.0 * core;
  return std::abs(potential_c(x, t) - reconstructed);
}

Potential potential() {
  // c is even in x and increases with |x|; in t it is monotone up to a
  // single sign change of the derivative, so the box maximum of c_plus sits
  // at (max |x|, one of the two time endpoints).
  Potential::BoxBound bound = [](const Box& box) {
    const double xm = std::max(std::abs(box.x_lo), std::abs(box.x_hi));
    return std::max({0.0, potential_c(xm, box.t_lo), potential_c(xm, box.t_hi)});
  };
  return Potential("quantum_gaussian", &potential_c, 1.0, std::move(bound),
                   true);
}

std::vector<double> density(const Grid& grid, double t) {
  std::vector<double> out(grid.n);
  for (int i = 0; i < grid.n; ++i) out[i] = rho(grid.points[i], t);
  return out;
}

}  // namespace fkbridge::quantum

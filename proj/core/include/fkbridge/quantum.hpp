#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "fkbridge/grid.hpp"
#include "fkbridge/potential.hpp"

namespace fkbridge::quantum {

// Closed forms for the spreading Gaussian packet of the rescaled free
// evolution. The packet starts at rho(x,0) = (2pi)^{-1/2} exp(-x^2/2) and
// spreads to variance 1 + t^2. Everything here is stateless, exact, and
// serves as the reference the kernel/bridge/diffusion machinery is tested
// against. The wave function is exposed as modulus and phase so the rest
// of the toolkit never touches complex arithmetic.

/// log of the backward factor theta(x,t) = exp(R + S); generic over the
/// scalar so tests can differentiate it with dual numbers.
template <class Scalar>
Scalar log_theta_generic(const Scalar& x, const Scalar& t) {
  using std::atan;
  using std::log;
  const Scalar s2 = Scalar(1) + t * t;
  return Scalar(-0.25) * log(Scalar(2 * std::numbers::pi) * s2) -
         (x * x / Scalar(4)) * (Scalar(1) - t) / s2 - atan(t) / Scalar(2);
}

/// Density rho(x,t) = |psi(x,t)|^2 = [2pi(1+t^2)]^{-1/2} exp(-x^2/2(1+t^2)).
double rho(double x, double t);

/// Madelung exponents: psi = exp(R + iS).
double madelung_R(double x, double t);
double madelung_S(double x, double t);

double psi_modulus(double x, double t);
double psi_phase(double x, double t);

/// theta = exp(R+S), theta_star = exp(R-S); rho = theta * theta_star.
double theta(double x, double t);
double theta_star(double x, double t);

/// Drift of the interpolating diffusion: b(x,t) = -(1-t) x / (1+t^2).
double drift_b(double x, double t);

/// Feynman-Kac potential c(x,t) = x^2/2(1+t^2)^2 - 1/(1+t^2); equals
/// 2 (d^2/dx^2) sqrt(rho) / sqrt(rho) and is bounded below by -1.
double potential_c(double x, double t);

// Hand-derived exact partials (finite-difference checked in tests), so the
// drift/potential identities are not polluted by stencil error.
double dt_log_theta(double x, double t);
double dx_drift_b(double x, double t);

/// The two readings of the drift-potential identity. The identity as
/// usually printed carries an unbalanced bracket; the half_bracket reading
///   c = dt log(theta) + (b^2/2 + db/dx) / 2
/// reproduces c exactly, while leading_two doubles the right-hand side and
/// is kept as the rejected alternative for discrimination tests.
enum class DriftPotentialVariant { half_bracket, leading_two };

/// |c(x,t) - reconstruction| under the chosen variant, all terms exact.
double drift_potential_residual(double x, double t, DriftPotentialVariant v);

/// The potential wrapped for kernel construction; lower bound M = 1 and a
/// closed-form positive-part bound on boxes.
Potential potential();

/// rho(., t) sampled on a grid (not renormalized).
std::vector<double> density(const Grid& grid, double t);

}  // namespace fkbridge::quantum

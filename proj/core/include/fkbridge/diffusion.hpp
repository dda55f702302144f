#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fkbridge/bridge.hpp"
#include "fkbridge/grid.hpp"
#include "fkbridge/rng.hpp"

namespace fkbridge {

/// Drift of the interpolating diffusion, b(x,t) = 2 d/dx log g(x,t), on the
/// solution's grid and time mesh.
struct DriftField {
  Grid grid;
  std::vector<double> time_mesh;
  std::vector<std::vector<double>> values;

  /// Linear interpolation in x, nearest mesh point in t.
  double at(double x, double t) const;
};

DriftField drift_field(const BridgeSolution& sol);

/// Euler-Maruyama trajectories of dX = b dt + sqrt(2) dW. States are
/// recorded at the drift mesh times; the integrator substeps at ~dt in
/// between (recording every raw step of 1e5 paths would be gigabytes).
struct PathEnsemble {
  int n_paths = 0;
  double dt = 0.0;
  std::vector<double> record_times;
  Eigen::MatrixXd states;  // n_paths x record_times.size()
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::int64_t reflection_events = 0;
  std::int64_t paths_reflected = 0;
};

/// Initial states are drawn from rho0 by inverse-CDF on the grid; path p
/// consumes the derived stream with stream_id = rng.stream_id + p, so the
/// ensemble is bit-reproducible for any thread count. Paths stepping past
/// the grid are reflected and counted; in strict mode a reflected-path
/// fraction above 1% raises DomainError (the grid is too narrow).
PathEnsemble sample_paths(const DriftField& drift, std::span<const double> rho0,
                          int n_paths, double dt, RngStream rng,
                          bool strict_boundary = false);

using TransitionDensityBuilder =
    std::function<TransitionDensity(double s, double t)>;

/// Small-time conditional-moment ladders at one probe point:
///   b_hat(dt) = (1/dt) int_{|x-x0|<=eps} (x-x0)   p(x0,s,x,s+dt) dx
///   a_hat(dt) = (1/dt) int_{|x-x0|<=eps} (x-x0)^2 p(x0,s,x,s+dt) dx
///   tail(dt)  = (1/dt) int_{|x-x0|> eps}          p(x0,s,x,s+dt) dx
/// The whole ladder is returned; limits are reported as trends, never
/// extrapolated.
struct LocalCharacteristics {
  double x0 = 0.0;
  double s = 0.0;
  double epsilon = 0.0;
  std::vector<double> dt_ladder;
  std::vector<double> b_hat;
  std::vector<double> a_hat;
  std::vector<double> tail;
};

LocalCharacteristics estimate_local_characteristics(
    const TransitionDensityBuilder& p_builder, double x0, double s,
    double epsilon, std::span<const double> dt_ladder);

/// For each dt, sup over grid points y in [K_lo, K_hi] of
/// (1/dt) int_{|x-y|>eps} p(y,s,x,s+dt) dx. Continuous sample paths make
/// this vanish faster than dt; callers assert the decreasing trend.
std::vector<double> dynkin_diagnostic(const TransitionDensityBuilder& p_builder,
                                      double s, double K_lo, double K_hi,
                                      double epsilon,
                                      std::span<const double> dt_ladder);

/// For each dt, quad_y rho_s(y) int_{|x-y|>=eps} p(y,s,x,s+dt) dx —
/// the density-averaged escape mass whose vanishing is the stochastic
/// continuity criterion.
std::vector<double> stochastic_continuity_diagnostic(
    const TransitionDensityBuilder& p_builder, double s,
    std::span<const double> rho_s, double epsilon,
    std::span<const double> dt_ladder);

}  // namespace fkbridge

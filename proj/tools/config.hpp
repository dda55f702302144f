#pragma once

#include <cstdint>
#include <string>

#include "CLI11.hpp"

#include "fkbridge/kernels.hpp"
#include "fkbridge/potential.hpp"

namespace fkbridge::cli {

/// Everything a run needs, resolvable from defaults < TOML config < flags.
struct RunConfig {
  double grid_lo = -8.0;
  double grid_hi = 8.0;
  int grid_n = 401;

  double horizon = 1.0;
  double mesh_step = 0.05;

  std::string example;  // shortcut: sets potential and boundary together
  std::string potential = "quantum";  // zero | constant | quantum
  double constant_level = 1.0;

  std::string method = "parametrix";  // heat | parametrix | monte_carlo
  int n_terms = 8;
  double split_max = 0.25;
  bool auto_split = true;
  int submesh_points = 5;
  int n_paths = 2000;
  int n_steps = 64;
  double kernel_s = 0.0;
  double kernel_t = 0.25;

  std::string boundary = "quantum";  // quantum | csv
  std::string boundary_rho0_file;
  std::string boundary_rhoT_file;

  double tol = 1e-10;
  int max_iter = 10000;

  int sim_paths = 100000;
  double sim_dt = 1e-3;
  bool strict_boundary = false;
  double diag_s = 0.25;
  double diag_epsilon = 0.5;

  std::uint64_t seed = 1;
  std::string output_dir = "fkbridge-out";
  int threads = 0;  // 0 = all cores
};

/// Registers every RunConfig field on the app (configurable from the TOML
/// file passed via --config).
void attach_options(CLI::App& app, RunConfig& cfg);

/// Field-level validation; throws ConfigError naming the offending field.
void validate_config(const RunConfig& cfg);

Grid make_grid(const RunConfig& cfg);
Potential make_potential(const RunConfig& cfg);
KernelOptions make_kernel_options(const RunConfig& cfg);
KernelMethod parse_method(const RunConfig& cfg);

}  // namespace fkbridge::cli

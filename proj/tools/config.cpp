#include "config.hpp"

#include <cmath>

#include "fkbridge/errors.hpp"
#include "fkbridge/quantum.hpp"

namespace fkbridge::cli {

void attach_options(CLI::App& app, RunConfig& cfg) {
  app.set_config("--config", "", "TOML config file (flat dashed keys)");

  app.add_option("--grid-lo", cfg.grid_lo, "left grid endpoint");
  app.add_option("--grid-hi", cfg.grid_hi, "right grid endpoint");
  app.add_option("--grid-n", cfg.grid_n, "grid point count (>= 3)");

  app.add_option("--horizon", cfg.horizon, "time horizon T");
  app.add_option("--mesh-step", cfg.mesh_step, "field/kernel tiling step");

  app.add_option("--example", cfg.example,
                 "named example; 'quantum' sets potential and boundary");
  app.add_option("--potential", cfg.potential,
                 "potential: zero | constant | quantum");
  app.add_option("--constant-level", cfg.constant_level,
                 "level of the constant potential");

  app.add_option("--method", cfg.method,
                 "kernel method: heat | parametrix | monte_carlo");
  app.add_option("--n-terms", cfg.n_terms, "parametrix series terms");
  app.add_option("--split-max", cfg.split_max,
                 "longest parametrix sub-interval");
  app.add_flag("--auto-split,!--no-auto-split", cfg.auto_split,
               "tighten splits from the potential bound");
  app.add_option("--submesh-points", cfg.submesh_points,
                 "time-quadrature nodes per sub-interval");
  app.add_option("--n-paths", cfg.n_paths, "Monte Carlo kernel paths");
  app.add_option("--n-steps", cfg.n_steps, "Monte Carlo bridge steps");
  app.add_option("--kernel-s", cfg.kernel_s, "kernel source time");
  app.add_option("--kernel-t", cfg.kernel_t, "kernel target time");

  app.add_option("--boundary", cfg.boundary,
                 "boundary densities: quantum | csv");
  app.add_option("--boundary-rho0", cfg.boundary_rho0_file,
                 "CSV file with the t=0 density (x,value)");
  app.add_option("--boundary-rhoT", cfg.boundary_rhoT_file,
                 "CSV file with the t=T density (x,value)");

  app.add_option("--tol", cfg.tol, "solver marginal tolerance");
  app.add_option("--max-iter", cfg.max_iter, "solver iteration cap");

  app.add_option("--paths", cfg.sim_paths, "simulated path count");
  app.add_option("--dt", cfg.sim_dt, "Euler-Maruyama step");
  app.add_flag("--strict-boundary", cfg.strict_boundary,
               "fail when > 1% of paths hit the grid boundary");
  app.add_option("--diag-s", cfg.diag_s, "diagnostics source time");
  app.add_option("--diag-epsilon", cfg.diag_epsilon,
                 "diagnostics escape radius");

  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--output-dir,-o", cfg.output_dir, "artifact directory");
  app.add_option("--threads", cfg.threads,
                 "worker cap (0 = all cores; env FKBRIDGE_THREADS)");
}

void validate_config(const RunConfig& cfg) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError(field + ": " + why);
  };
  if (cfg.grid_n < 3) {
    fail("grid.n", "must be at least 3 (got " + std::to_string(cfg.grid_n) + ")");
  }
  if (!(cfg.grid_lo < cfg.grid_hi)) fail("grid.lo", "requires grid.lo < grid.hi");
  if (!(cfg.horizon > 0.0)) fail("horizon", "must be positive");
  if (!(cfg.mesh_step > 0.0) || cfg.mesh_step > cfg.horizon + 1e-12) {
    fail("mesh-step", "must lie in (0, horizon]");
  }
  if (!cfg.example.empty() && cfg.example != "quantum") {
    fail("example", "unknown example '" + cfg.example + "' (only: quantum)");
  }
  if (cfg.potential != "zero" && cfg.potential != "constant" &&
      cfg.potential != "quantum") {
    fail("potential", "must be zero | constant | quantum");
  }
  if (cfg.method != "heat" && cfg.method != "parametrix" &&
      cfg.method != "monte_carlo") {
    fail("method", "must be heat | parametrix | monte_carlo");
  }
  if (cfg.n_terms < 1) fail("n-terms", "must be at least 1");
  if (!(cfg.split_max > 0.0)) fail("split-max", "must be positive");
  if (cfg.submesh_points < 2) fail("submesh-points", "must be at least 2");
  if (cfg.n_paths < 100) fail("n-paths", "must be at least 100");
  if (cfg.n_steps < 2) fail("n-steps", "must be at least 2");
  if (!(cfg.kernel_t > cfg.kernel_s)) fail("kernel-t", "requires kernel-t > kernel-s");
  if (cfg.boundary != "quantum" && cfg.boundary != "csv") {
    fail("boundary", "must be quantum | csv");
  }
  if (cfg.boundary == "csv" &&
      (cfg.boundary_rho0_file.empty() || cfg.boundary_rhoT_file.empty())) {
    fail("boundary", "csv boundary needs boundary-rho0 and boundary-rhoT");
  }
  if (!(cfg.tol > 0.0)) fail("tol", "must be positive");
  if (cfg.max_iter < 1) fail("max-iter", "must be at least 1");
  if (cfg.sim_paths < 1) fail("paths", "must be at least 1");
  if (!(cfg.sim_dt > 0.0) || cfg.sim_dt > cfg.mesh_step + 1e-12) {
    fail("dt", "must lie in (0, mesh-step]");
  }
  if (cfg.threads < 0) fail("threads", "must be nonnegative");
  if (!(cfg.diag_epsilon > 0.0)) fail("diag-epsilon", "must be positive");
  const double steps = cfg.diag_s / cfg.mesh_step;
  if (cfg.diag_s < 0.0 || cfg.diag_s > cfg.horizon ||
      std::abs(steps - std::round(steps)) > 1e-9) {
    fail("diag-s", "must be a multiple of mesh-step within [0, horizon]");
  }
}

Grid make_grid(const RunConfig& cfg) {
  return make_uniform_grid(cfg.grid_lo, cfg.grid_hi, cfg.grid_n);
}

Potential make_potential(const RunConfig& cfg) {
  const std::string which =
      cfg.example == "quantum" ? "quantum" : cfg.potential;
  if (which == "zero") return Potential::zero();
  if (which == "constant") return Potential::constant(cfg.constant_level);
  return quantum::potential();
}

KernelOptions make_kernel_options(const RunConfig& cfg) {
  KernelOptions opts;
  opts.n_terms = cfg.n_terms;
  opts.split_max = cfg.split_max;
  opts.auto_split = cfg.auto_split;
  opts.submesh_points = cfg.submesh_points;
  opts.n_paths = cfg.n_paths;
  opts.n_steps = cfg.n_steps;
  opts.rng = RngStream(cfg.seed, 0);
  return opts;
}

KernelMethod parse_method(const RunConfig& cfg) {
  return kernel_method_from_string(cfg.method);
}

}  // namespace fkbridge::cli

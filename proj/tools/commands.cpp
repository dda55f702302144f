#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

#include "json.hpp"

#include "fkbridge/bridge.hpp"
#include "fkbridge/diffusion.hpp"
#include "fkbridge/errors.hpp"
#include "fkbridge/io.hpp"
#include "fkbridge/quantum.hpp"
#include "fkbridge/threads.hpp"
#include "fkbridge/validate.hpp"
#include "fkbridge/version.hpp"

namespace fkbridge::cli {

namespace {

namespace fs = std::filesystem;

nlohmann::json config_echo(const RunConfig& cfg) {
  nlohmann::json j;
  j["grid"] = {{"lo", cfg.grid_lo}, {"hi", cfg.grid_hi}, {"n", cfg.grid_n}};
  j["horizon"] = cfg.horizon;
  j["mesh_step"] = cfg.mesh_step;
  j["example"] = cfg.example;
  j["potential"] = cfg.potential;
  j["constant_level"] = cfg.constant_level;
  j["method"] = cfg.method;
  j["kernel"] = {{"n_terms", cfg.n_terms},
                 {"split_max", cfg.split_max},
                 {"auto_split", cfg.auto_split},
                 {"submesh_points", cfg.submesh_points},
                 {"n_paths", cfg.n_paths},
                 {"n_steps", cfg.n_steps},
                 {"s", cfg.kernel_s},
                 {"t", cfg.kernel_t}};
  j["boundary"] = {{"kind", cfg.boundary},
                   {"rho0_file", cfg.boundary_rho0_file},
                   {"rhoT_file", cfg.boundary_rhoT_file}};
  j["solver"] = {{"tol", cfg.tol}, {"max_iter", cfg.max_iter}};
  j["simulate"] = {{"paths", cfg.sim_paths},
                   {"dt", cfg.sim_dt},
                   {"strict_boundary", cfg.strict_boundary},
                   {"diag_s", cfg.diag_s},
                   {"diag_epsilon", cfg.diag_epsilon}};
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["output_dir"] = cfg.output_dir;
  return j;
}

fs::path prepare_run(const RunConfig& cfg, const char* command) {
  validate_config(cfg);
  if (cfg.threads > 0) set_max_threads(cfg.threads);
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["command"] = command;
  manifest["version"] = version_string();
  manifest["seed"] = cfg.seed;
  manifest["config"] = config_echo(cfg);
  io::write_json(manifest, dir / "manifest.json");
  return dir;
}

std::vector<double> uniform_times(double lo, double hi, int count) {
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) {
    t[i] = lo + (hi - lo) * i / static_cast<double>(count - 1);
  }
  t.front() = lo;
  t.back() = hi;
  return t;
}

BoundaryData load_boundary(const RunConfig& cfg, const Grid& grid) {
  const std::string kind = cfg.example == "quantum" ? "quantum" : cfg.boundary;
  if (kind == "quantum") {
    return make_boundary_data(grid, quantum::density(grid, 0.0),
                              quantum::density(grid, cfg.horizon),
                              cfg.horizon);
  }
  return make_boundary_data(grid,
                            io::read_density_csv(grid, cfg.boundary_rho0_file),
                            io::read_density_csv(grid, cfg.boundary_rhoT_file),
                            cfg.horizon);
}

struct BridgePipeline {
  Grid grid;
  Potential pot;
  KernelOptions opts;
  KernelMethod method = KernelMethod::parametrix;
  BoundaryData data;
  std::vector<KernelMatrix> tiles;
  BridgeSolution sol;
};

BridgePipeline run_bridge_pipeline(const RunConfig& cfg) {
  BridgePipeline pipe{make_grid(cfg),
                      make_potential(cfg),
                      make_kernel_options(cfg),
                      parse_method(cfg),
                      {},
                      {},
                      {}};
  pipe.data = load_boundary(cfg, pipe.grid);
  const int n_tiles =
      std::max(1, static_cast<int>(std::lround(cfg.horizon / cfg.mesh_step)));
  const std::vector<double> times = uniform_times(0.0, cfg.horizon, n_tiles + 1);
  pipe.tiles.reserve(n_tiles);
  for (int m = 0; m < n_tiles; ++m) {
    pipe.tiles.push_back(kernel_matrix(pipe.pot, pipe.grid, times[m],
                                       times[m + 1], pipe.method, pipe.opts));
  }
  KernelMatrix k0T = pipe.tiles.front();
  for (int m = 1; m < n_tiles; ++m) k0T = compose(k0T, pipe.tiles[m]);
  BridgeSolution sol =
      solve_schroedinger_system(k0T, pipe.data, cfg.tol, cfg.max_iter);
  pipe.sol = propagate_fields(std::move(sol), pipe.tiles);
  return pipe;
}

// Largest pair (c1, c2) with g(y) >= c1 exp(-c2 y^2) on the grid: c2 from a
// least-squares fit of log g against y^2, c1 pushed down until the bound
// holds at every node.
nlohmann::json lower_envelope_fit(const Grid& grid,
                                  const std::vector<double>& g) {
  double sxx = 0.0, sx = 0.0, sy = 0.0, sxy = 0.0;
  const auto n = static_cast<double>(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.points[i] * grid.points[i];
    const double y = std::log(g[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double c2 = std::max(0.0, -slope);
  double log_c1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.n; ++i) {
    log_c1 = std::min(log_c1, std::log(g[i]) + c2 * grid.points[i] * grid.points[i]);
  }
  return {{"c1", std::exp(log_c1)}, {"c2", c2}};
}

}  // namespace

int run_kernel(const RunConfig& cfg, const KernelFlags& flags) {
  const fs::path dir = prepare_run(cfg, "kernel");
  const Grid grid = make_grid(cfg);
  const Potential pot = make_potential(cfg);
  const KernelOptions opts = make_kernel_options(cfg);
  const KernelMethod method = parse_method(cfg);

  const KernelMatrix k =
      kernel_matrix(pot, grid, cfg.kernel_s, cfg.kernel_t, method, opts);
  io::write_kernel_csv(k, dir / "kernel.csv");
  io::write_json(io::kernel_sidecar(k, opts), dir / "kernel.json");
  std::cout << "kernel: " << cfg.method << " on [" << cfg.kernel_s << ", "
            << cfg.kernel_t << "], grid n = " << grid.n << ", min entry "
            << k.values.minCoeff() << "\n";

  if (flags.check_ck) {
    const double r = cfg.kernel_s + 0.4 * (cfg.kernel_t - cfg.kernel_s);
    const KernelMatrix k_sr =
        kernel_matrix(pot, grid, cfg.kernel_s, r, method, opts);
    const KernelMatrix k_rt =
        kernel_matrix(pot, grid, r, cfg.kernel_t, method, opts);
    const double residual = chapman_kolmogorov_residual(k_sr, k_rt, k);
    std::cout << "chapman_kolmogorov_residual = " << residual << "\n";
  }
  if (flags.check_reversal) {
    if (std::abs(cfg.kernel_s) > 1e-12) {
      throw ConfigError("kernel-s: --check-reversal requires kernel-s = 0");
    }
    const double residual =
        time_reversal_residual(pot, grid, cfg.kernel_t, method, opts);
    std::cout << "time_reversal_residual = " << residual << "\n";
  }
  return 0;
}

int run_bridge(const RunConfig& cfg) {
  const fs::path dir = prepare_run(cfg, "bridge");
  const BridgePipeline pipe = run_bridge_pipeline(cfg);

  io::write_bridge_fields_csv(pipe.sol, dir / "bridge_fields.csv");
  nlohmann::json summary = io::bridge_summary(pipe.sol);
  nlohmann::json envelopes = nlohmann::json::array();
  for (std::size_t m = 0; m < pipe.sol.time_mesh.size(); ++m) {
    nlohmann::json fit = lower_envelope_fit(pipe.grid, pipe.sol.g_field[m]);
    fit["t"] = pipe.sol.time_mesh[m];
    envelopes.push_back(fit);
  }
  summary["g_lower_envelope"] = envelopes;
  io::write_json(summary, dir / "bridge_summary.json");

  std::cout << "bridge: converged in " << pipe.sol.iterations
            << " iterations, marginal residual " << pipe.sol.final_residual
            << "\n";
  return 0;
}

int run_simulate(const RunConfig& cfg) {
  const fs::path dir = prepare_run(cfg, "simulate");
  const BridgePipeline pipe = run_bridge_pipeline(cfg);

  const DriftField drift = drift_field(pipe.sol);
  const PathEnsemble ens =
      sample_paths(drift, pipe.data.rho0, cfg.sim_paths, cfg.sim_dt,
                   RngStream(cfg.seed, 0), cfg.strict_boundary);
  io::write_ensemble_csv(ens, dir / "paths.csv");
  nlohmann::json ens_manifest = io::ensemble_manifest(ens);
  ens_manifest["drift"] = {{"potential", pipe.pot.name()},
                           {"kernel_method", cfg.method},
                           {"mesh_step", cfg.mesh_step},
                           {"solver_tol", cfg.tol}};
  io::write_json(ens_manifest, dir / "paths.json");

  const TransitionBuilder builder(pipe.pot, pipe.sol, pipe.method, pipe.opts);
  const std::vector<double> ladder{0.1, 0.05, 0.02, 0.01, 0.005};
  const std::vector<double> dynkin = dynkin_diagnostic(
      builder, cfg.diag_s, -2.0, 2.0, cfg.diag_epsilon, ladder);
  const std::vector<double> rho_s =
      pipe.sol.density_at(pipe.sol.mesh_index(cfg.diag_s));
  const std::vector<double> continuity = stochastic_continuity_diagnostic(
      builder, cfg.diag_s, rho_s, cfg.diag_epsilon, ladder);
  io::write_ladder_csv(ladder, dynkin, dir / "dynkin_ladder.csv");
  io::write_ladder_csv(ladder, continuity, dir / "continuity_ladder.csv");

  std::cout << "simulate: " << cfg.sim_paths << " paths, dt = " << cfg.sim_dt
            << ", reflected paths " << ens.paths_reflected
            << ", dynkin final " << dynkin.back() << ", continuity final "
            << continuity.back() << "\n";
  return 0;
}

int run_validate(const RunConfig& cfg) {
  const fs::path dir = prepare_run(cfg, "validate");
  validation::Options opts;
  opts.seed = cfg.seed;
  opts.artifact_dir = dir / "artifacts";
  const validation::Report report = validation::run_validation(opts);
  const std::string text = validation::format_report(report);
  std::cout << text;
  io::write_text(text, dir / "validation_report.txt");
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : report.criteria) {
    rows.push_back({{"id", c.id},
                    {"name", c.name},
                    {"passed", c.passed},
                    {"detail", c.detail}});
  }
  io::write_json(rows, dir / "validation_report.json");
  return report.all_passed() ? 0 : 1;
}

}  // namespace fkbridge::cli

#include "fkbridge/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fkbridge/errors.hpp"

namespace fkbridge::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);  // '\n' endings everywhere
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  return out;
}

}  // namespace

std::string format_g17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_kernel_csv(const KernelMatrix& kernel,
                      const std::filesystem::path& path) {
  auto out = open_out(path);
  const bool with_err = kernel.std_error.has_value();
  out << (with_err ? "y_index,x_index,s,t,value,stderr\n"
                   : "y_index,x_index,s,t,value\n");
  const std::string s = format_g17(kernel.s);
  const std::string t = format_g17(kernel.t);
  for (int i = 0; i < kernel.grid.n; ++i) {
    for (int j = 0; j < kernel.grid.n; ++j) {
      out << i << ',' << j << ',' << s << ',' << t << ','
          << format_g17(kernel.values(i, j));
      if (with_err) out << ',' << format_g17((*kernel.std_error)(i, j));
      out << '\n';
    }
  }
}

nlohmann::json kernel_sidecar(const KernelMatrix& kernel,
                              const KernelOptions& opts) {
  nlohmann::json j;
  j["grid"] = {{"lo", kernel.grid.lo},
               {"hi", kernel.grid.hi},
               {"n", kernel.grid.n}};
  j["s"] = kernel.s;
  j["t"] = kernel.t;
  j["method"] = std::string(to_string(kernel.method));
  j["options"] = {{"n_terms", opts.n_terms},
                  {"split_max", opts.split_max},
                  {"auto_split", opts.auto_split},
                  {"submesh_points", opts.submesh_points},
                  {"n_paths", opts.n_paths},
                  {"n_steps", opts.n_steps},
                  {"seed", opts.rng.seed()},
                  {"stream_id", opts.rng.stream_id()}};
  j["min_value"] = kernel.values.minCoeff();
  return j;
}

void write_bridge_fields_csv(const BridgeSolution& sol,
                             const std::filesystem::path& path) {
  if (sol.f_field.empty()) {
    throw DomainError("write_bridge_fields_csv: fields not propagated");
  }
  auto out = open_out(path);
  out << "t,x,f,g,rho\n";
  for (std::size_t m = 0; m < sol.time_mesh.size(); ++m) {
    const std::string t = format_g17(sol.time_mesh[m]);
    for (int i = 0; i < sol.grid.n; ++i) {
      out << t << ',' << format_g17(sol.grid.points[i]) << ','
          << format_g17(sol.f_field[m][i]) << ','
          << format_g17(sol.g_field[m][i]) << ','
          << format_g17(sol.f_field[m][i] * sol.g_field[m][i]) << '\n';
    }
  }
}

nlohmann::json bridge_summary(const BridgeSolution& sol) {
  nlohmann::json j;
  j["grid"] = {{"lo", sol.grid.lo}, {"hi", sol.grid.hi}, {"n", sol.grid.n}};
  j["T"] = sol.T;
  j["iterations"] = sol.iterations;
  j["final_residual"] = sol.final_residual;
  j["residual_history"] = sol.residual_history;
  j["gauge"] = "quad(f0) = 1";
  j["time_mesh"] = sol.time_mesh;
  return j;
}

void write_ensemble_csv(const PathEnsemble& ens,
                        const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "path_id,t,x\n";
  std::vector<std::string> times(ens.record_times.size());
  for (std::size_t m = 0; m < times.size(); ++m) {
    times[m] = format_g17(ens.record_times[m]);
  }
  for (int p = 0; p < ens.n_paths; ++p) {
    for (std::size_t m = 0; m < times.size(); ++m) {
      out << p << ',' << times[m] << ','
          << format_g17(ens.states(p, static_cast<Eigen::Index>(m))) << '\n';
    }
  }
}

nlohmann::json ensemble_manifest(const PathEnsemble& ens) {
  nlohmann::json j;
  j["n_paths"] = ens.n_paths;
  j["dt"] = ens.dt;
  j["record_times"] = ens.record_times;
  j["seed"] = ens.seed;
  j["stream_id"] = ens.stream_id;
  j["reflection_events"] = ens.reflection_events;
  j["paths_reflected"] = ens.paths_reflected;
  return j;
}

void write_ladder_csv(std::span<const double> dt_ladder,
                      std::span<const double> values,
                      const std::filesystem::path& path) {
  if (dt_ladder.size() != values.size()) {
    throw DomainError("write_ladder_csv: ladder/value length mismatch");
  }
  auto out = open_out(path);
  out << "dt,value\n";
  for (std::size_t k = 0; k < dt_ladder.size(); ++k) {
    out << format_g17(dt_ladder[k]) << ',' << format_g17(values[k]) << '\n';
  }
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << text;
}

std::vector<double> read_density_csv(const Grid& grid,
                                     const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("boundary: cannot open density file '" + path.string() +
                      "'");
  }
  std::vector<double> values;
  values.reserve(grid.n);
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string x_str, v_str;
    if (!std::getline(ss, x_str, ',') || !std::getline(ss, v_str)) {
      throw ConfigError("boundary: malformed CSV line '" + line + "'");
    }
    char* end = nullptr;
    const double x = std::strtod(x_str.c_str(), &end);
    if (end == x_str.c_str()) {
      if (row == 0 && values.empty()) continue;  // header
      throw ConfigError("boundary: non-numeric x in line '" + line + "'");
    }
    const double v = std::strtod(v_str.c_str(), nullptr);
    if (row >= grid.n) {
      throw ConfigError("boundary: more rows than grid points");
    }
    if (std::abs(x - grid.points[row]) >
        1e-9 * std::max(1.0, std::abs(grid.points[row]))) {
      throw ConfigError("boundary: x column does not match the grid at row " +
                        std::to_string(row));
    }
    values.push_back(v);
    ++row;
  }
  if (row != grid.n) {
    throw ConfigError("boundary: expected " + std::to_string(grid.n) +
                      " rows, got " + std::to_string(row));
  }
  return values;
}

}  // namespace fkbridge::io

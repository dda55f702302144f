#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "json.hpp"

#include "fkbridge/bridge.hpp"
#include "fkbridge/diffusion.hpp"
#include "fkbridge/kernels.hpp"

namespace fkbridge::io {

/// Doubles in every CSV artifact: 17 significant digits, round-trip exact.
std::string format_g17(double value);

/// Columns: y_index,x_index,s,t,value[,stderr]; rows in row-major order.
void write_kernel_csv(const KernelMatrix& kernel,
                      const std::filesystem::path& path);

/// Reproducibility sidecar for a kernel CSV: grid, times, method, options.
nlohmann::json kernel_sidecar(const KernelMatrix& kernel,
                              const KernelOptions& opts);

/// Columns: t,x,f,g,rho over every mesh time (requires propagated fields).
void write_bridge_fields_csv(const BridgeSolution& sol,
                             const std::filesystem::path& path);

/// Metadata plus residual history.
nlohmann::json bridge_summary(const BridgeSolution& sol);

/// Columns: path_id,t,x at the recorded times.
void write_ensemble_csv(const PathEnsemble& ens,
                        const std::filesystem::path& path);

nlohmann::json ensemble_manifest(const PathEnsemble& ens);

/// Columns: dt,value.
void write_ladder_csv(std::span<const double> dt_ladder,
                      std::span<const double> values,
                      const std::filesystem::path& path);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);

void write_text(const std::string& text, const std::filesystem::path& path);

/// Reads a two-column x,value CSV (header optional) whose x column must
/// match the grid nodes; used for user-supplied boundary densities.
std::vector<double> read_density_csv(const Grid& grid,
                                     const std::filesystem::path& path);

}  // namespace fkbridge::io

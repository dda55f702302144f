#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fkbridge::validation {

/// One acceptance criterion of the quantum-example validation suite.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Options {
  std::uint64_t seed = 1u;
  /// When nonempty, the suite also writes its artifact bundle (twice, for
  /// the byte-identity criterion) under this directory.
  std::filesystem::path artifact_dir;
  bool verbose = false;
};

struct Report {
  std::vector<CriterionResult> criteria;
  bool all_passed() const;
};

/// Runs the full closed-form validation suite against the quantum Gaussian
/// example: kernel identities, oracles, the bridge solve, diffusion
/// characteristics, simulation statistics, and artifact determinism.
/// Expensive (a few minutes): the bridge kernels are assembled at
/// production resolution.
Report run_validation(const Options& opts = {});

/// One pass/fail line per criterion.
std::string format_report(const Report& report);

}  // namespace fkbridge::validation

#pragma once

#include "config.hpp"

namespace fkbridge::cli {

struct KernelFlags {
  bool check_ck = false;
  bool check_reversal = false;
};

int run_kernel(const RunConfig& cfg, const KernelFlags& flags);
int run_bridge(const RunConfig& cfg);
int run_simulate(const RunConfig& cfg);
int run_validate(const RunConfig& cfg);

}  // namespace fkbridge::cli

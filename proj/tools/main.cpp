#include <iostream>

#include "CLI11.hpp"

#include "commands.hpp"
#include "config.hpp"
#include "fkbridge/errors.hpp"
#include "fkbridge/version.hpp"

int main(int argc, char** argv) {
  using namespace fkbridge;

  CLI::App app{"Schroedinger bridge toolkit: Feynman-Kac kernels, the "
               "Schroedinger system, and the interpolating diffusion"};
  app.set_version_flag("--version", std::string(version_string()));
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand name

  cli::RunConfig cfg;
  cli::attach_options(app, cfg);

  cli::KernelFlags kernel_flags;
  CLI::App* kernel = app.add_subcommand(
      "kernel", "build a kernel matrix and optional identity checks");
  kernel->add_flag("--check-ck", kernel_flags.check_ck,
                   "print the Chapman-Kolmogorov composition residual");
  kernel->add_flag("--check-reversal", kernel_flags.check_reversal,
                   "print the time-reversal identity residual");

  CLI::App* bridge = app.add_subcommand(
      "bridge", "solve the Schroedinger system and propagate the fields");
  CLI::App* simulate = app.add_subcommand(
      "simulate", "sample the interpolating diffusion and run diagnostics");
  CLI::App* validate = app.add_subcommand(
      "validate", "run the closed-form validation suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // config/usage problems exit 2
  }

  try {
    if (kernel->parsed()) return cli::run_kernel(cfg, kernel_flags);
    if (bridge->parsed()) return cli::run_bridge(cfg);
    if (simulate->parsed()) return cli::run_simulate(cfg);
    if (validate->parsed()) return cli::run_validate(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

#include <benchmark/benchmark.h>

#include "fkbridge/diffusion.hpp"
#include "fkbridge/rng.hpp"

using namespace fkbridge;

namespace {

void BM_rng_normal(benchmark::State& state) {
  RngStream rng(1, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rng.normal());
  }
}

void BM_sample_paths(benchmark::State& state) {
  const Grid g = make_uniform_grid(-8.0, 8.0, 401);
  DriftField drift;
  drift.grid = g;
  for (int m = 0; m <= 20; ++m) {
    drift.time_mesh.push_back(m * 0.05);
    std::vector<double> b(g.n);
    for (int i = 0; i < g.n; ++i) b[i] = -g.points[i] * (1.0 - m * 0.05);
    drift.values.push_back(std::move(b));
  }
  std::vector<double> rho0(g.n);
  for (int i = 0; i < g.n; ++i) {
    rho0[i] = std::exp(-0.5 * g.points[i] * g.points[i]);
  }
  const int n_paths = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sample_paths(drift, rho0, n_paths, 1e-3, RngStream(7, 0)));
  }
  state.SetItemsProcessed(state.iterations() * n_paths * 1000);
}

}  // namespace

BENCHMARK(BM_rng_normal);
BENCHMARK(BM_sample_paths)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

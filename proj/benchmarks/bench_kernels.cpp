#include <benchmark/benchmark.h>

#include "fkbridge/kernels.hpp"
#include "fkbridge/quantum.hpp"

using namespace fkbridge;

namespace {

void BM_heat_matrix(benchmark::State& state) {
  const Grid g = make_uniform_grid(-8.0, 8.0, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernel_matrix(Potential::zero(), g, 0.0, 0.25, KernelMethod::heat));
  }
  state.SetItemsProcessed(state.iterations() * g.n * g.n);
}

void BM_parametrix_split(benchmark::State& state) {
  const Grid g = make_uniform_grid(-8.0, 8.0, static_cast<int>(state.range(0)));
  const Potential pot = quantum::potential();
  KernelOptions opts;
  opts.n_terms = 8;
  opts.submesh_points = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernel_matrix(pot, g, 0.0, 0.03125, KernelMethod::parametrix, opts));
  }
}

void BM_kernel_mc_point(benchmark::State& state) {
  const Potential pot = quantum::potential();
  for (auto _ : state) {
    benchmark::DoNotOptimize(fk_kernel_mc(pot, 0.5, 0.0, -0.5, 0.25,
                                          static_cast<int>(state.range(0)), 64,
                                          RngStream(1, 0)));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 64);
}

void BM_compose(benchmark::State& state) {
  const Grid g = make_uniform_grid(-8.0, 8.0, static_cast<int>(state.range(0)));
  const KernelMatrix a =
      kernel_matrix(Potential::zero(), g, 0.0, 0.25, KernelMethod::heat);
  const KernelMatrix b =
      kernel_matrix(Potential::zero(), g, 0.25, 0.5, KernelMethod::heat);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compose(a, b));
  }
}

}  // namespace

BENCHMARK(BM_heat_matrix)->Arg(101)->Arg(401);
BENCHMARK(BM_parametrix_split)->Arg(101)->Arg(201)->Arg(401)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_kernel_mc_point)->Arg(1000)->Arg(10000)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_compose)->Arg(101)->Arg(401)->Unit(benchmark::kMillisecond);

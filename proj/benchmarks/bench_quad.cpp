#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "fkbridge/grid.hpp"

using namespace fkbridge;

namespace {

std::vector<double> gaussian_samples(const Grid& g) {
  std::vector<double> v(g.n);
  for (int i = 0; i < g.n; ++i) v[i] = std::exp(-0.5 * g.points[i] * g.points[i]);
  return v;
}

void BM_quad(benchmark::State& state) {
  const Grid g = make_uniform_grid(-8.0, 8.0, static_cast<int>(state.range(0)));
  const auto v = gaussian_samples(g);
  for (auto _ : state) {
    benchmark::DoNotOptimize(quad(g, v));
  }
  state.SetItemsProcessed(state.iterations() * g.n);
}

void BM_quad_band(benchmark::State& state) {
  const Grid g = make_uniform_grid(-8.0, 8.0, static_cast<int>(state.range(0)));
  const auto v = gaussian_samples(g);
  for (auto _ : state) {
    benchmark::DoNotOptimize(quad_band(g, v, -0.51, 0.52));
  }
}

void BM_gradient(benchmark::State& state) {
  const Grid g = make_uniform_grid(-8.0, 8.0, static_cast<int>(state.range(0)));
  const auto v = gaussian_samples(g);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gradient(g, v));
  }
  state.SetItemsProcessed(state.iterations() * g.n);
}

void BM_interp(benchmark::State& state) {
  const Grid g = make_uniform_grid(-8.0, 8.0, 401);
  const auto v = gaussian_samples(g);
  double x = -7.9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(interp_linear(g, v, x));
    x += 0.37;
    if (x > 7.9) x -= 15.7;
  }
}

}  // namespace

BENCHMARK(BM_quad)->Arg(101)->Arg(401)->Arg(1601);
BENCHMARK(BM_quad_band)->Arg(401);
BENCHMARK(BM_gradient)->Arg(101)->Arg(401)->Arg(1601);
BENCHMARK(BM_interp);

BENCHMARK_MAIN();

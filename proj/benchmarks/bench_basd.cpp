#include <benchmark/benchmark.h>

#include "con360/basd.hpp"
#include "con360/parallel.hpp"

namespace {

void BM_BasdForFov(benchmark::State& state) {
  const auto h = static_cast<std::size_t>(state.range(0));
  con360::set_thread_count(static_cast<unsigned>(state.range(1)));
  const con360::geometry::ErpGrid grid(2 * h, h);
  con360::geometry::FovSpec fov;
  fov.center = {0.3, 3.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(con360::basd::basd_for_fov(fov, grid));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.pixels()));
}
BENCHMARK(BM_BasdForFov)->Args({64, 1})->Args({256, 1})->Args({256, 4})->Args({512, 4});

void BM_AngularBasd(benchmark::State& state) {
  con360::set_thread_count(1);
  const con360::geometry::ErpGrid grid(128, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        con360::basd::basd_for_fov({}, grid, con360::basd::DistanceMetric::kAngular));
  }
}
BENCHMARK(BM_AngularBasd);

}  // namespace

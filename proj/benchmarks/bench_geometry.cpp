#include <benchmark/benchmark.h>

#include <cmath>

#include "con360/geometry.hpp"

namespace {

con360::TensorF ramp_frame(std::size_t h) {
  con360::TensorF f({h, 2 * h});
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<float>(std::sin(0.001 * i));
  return f;
}

void BM_Cubemap(benchmark::State& state) {
  const auto h = static_cast<std::size_t>(state.range(0));
  const auto frame = ramp_frame(h);
  for (auto _ : state) benchmark::DoNotOptimize(con360::geometry::erp_to_cubemap(frame, h / 2));
}
BENCHMARK(BM_Cubemap)->Arg(256)->Arg(1024);

void BM_Viewport(benchmark::State& state) {
  const auto frame = ramp_frame(512);
  con360::geometry::FovSpec fov;
  fov.center = {0.2, -1.0};
  fov.roll = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(con360::geometry::extract_viewport(frame, fov, 256, 256));
  }
}
BENCHMARK(BM_Viewport);

}  // namespace

#include <benchmark/benchmark.h>

#include "con360/conditioning.hpp"
#include "con360/parallel.hpp"

namespace {

void BM_MapEncoder(benchmark::State& state) {
  namespace cond = con360::conditioning;
  con360::set_thread_count(static_cast<unsigned>(state.range(1)));
  const auto cfg = cond::MapEncoderConfig::reference();
  const auto weights = cond::WeightStore::random(cfg, 1);
  const auto t = static_cast<std::size_t>(state.range(0));
  const cond::ConditioningStack stack{con360::TensorF({t, 2, 256, 256}, 0.5f), 8.0};
  for (auto _ : state) benchmark::DoNotOptimize(cond::map_encoder_forward(stack, cfg, weights));
}
BENCHMARK(BM_MapEncoder)->Args({8, 1})->Args({32, 4})->Unit(benchmark::kMillisecond);

}  // namespace

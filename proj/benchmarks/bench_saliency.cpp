#include <benchmark/benchmark.h>

#include <random>

#include "con360/saliency.hpp"

namespace {

void BM_ConnectedComponents(benchmark::State& state) {
  const auto h = static_cast<std::size_t>(state.range(0));
  con360::saliency::BinaryMask mask{h, 2 * h, std::vector<std::uint8_t>(2 * h * h)};
  std::mt19937_64 rng(1);
  for (auto& b : mask.bits) b = (rng() % 3) == 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(con360::saliency::connected_components_wrapped(mask));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mask.bits.size()));
}
BENCHMARK(BM_ConnectedComponents)->Arg(64)->Arg(256);

}  // namespace

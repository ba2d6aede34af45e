#include <benchmark/benchmark.h>

#include <random>

#include "dispatch/event_queue.hpp"

namespace {

void BM_EventQueuePushPop(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dt(0.0, 10.0);
  for (auto _ : state) {
    dispatch::EventQueue q;
    for (std::size_t i = 0; i < n; ++i) q.push({.time = dt(rng), .kind = dispatch::EventKind::NewCall});
    while (auto e = q.pop()) benchmark::DoNotOptimize(e);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_EventQueuePushPop)->Arg(1 << 10)->Arg(1 << 16);

}  // namespace

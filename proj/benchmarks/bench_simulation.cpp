#include <benchmark/benchmark.h>

#include "dispatch/baselines.hpp"
#include "dispatch/experiment.hpp"

namespace {

void BM_NearestNeighborDay(benchmark::State& state) {
  const auto calls = static_cast<std::size_t>(state.range(0));
  dispatch::ExperimentConfig cfg;
  const auto demand = dispatch::DemandSource::synthetic(dispatch::hourly_rates(cfg.hourly_profile, calls + calls / 20),
                                                        dispatch::SpatialModel{cfg.clusters});
  const dispatch::DayRun run{"2022-02-01", "bench", calls, calls / 100, 42};
  for (auto _ : state) {
    dispatch::NearestNeighborPolicy nn;
    benchmark::DoNotOptimize(dispatch::simulate_day(cfg, demand, run, nn));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * calls));
}
BENCHMARK(BM_NearestNeighborDay)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

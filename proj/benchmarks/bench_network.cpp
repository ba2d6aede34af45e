#include <benchmark/benchmark.h>

#include <vector>

#include "dispatch/dqn_agent.hpp"

namespace {

void BM_QNetworkForward(benchmark::State& state) {
  dispatch::Rng rng(2);
  dispatch::rl::Mlp<float> net(dispatch::rl::AgentConfig{}.layer_dims(), 0.01f);
  net.init_uniform(rng);
  dispatch::FeatureVector x{};
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.05f * static_cast<float>(i);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_QNetworkForward);

void BM_TrainStep(benchmark::State& state) {
  dispatch::Rng rng(3);
  dispatch::rl::AgentConfig cfg;
  cfg.learning_starts = 64;
  dispatch::rl::DqnAgent agent("bench", cfg, rng);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (int i = 0; i < 256; ++i) {
    dispatch::rl::Transition t;
    for (auto& v : t.state_action) v = u(rng);
    t.reward = u(rng);
    t.next_candidates.resize(5);
    for (auto& c : t.next_candidates) {
      for (auto& v : c) v = u(rng);
    }
    agent.push(std::move(t));
  }
  for (auto _ : state) benchmark::DoNotOptimize(agent.train_step(rng));
}
BENCHMARK(BM_TrainStep);

}  // namespace

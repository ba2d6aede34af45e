#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dispatch/features.hpp"
#include "dispatch/network.hpp"
#include "dispatch/policy.hpp"
#include "dispatch/replay_buffer.hpp"
#include "dispatch/rng.hpp"

namespace dispatch::rl {

inline constexpr std::string_view kNewCallAgent = "new_call";
inline constexpr std::string_view kFreeVehicleAgent = "free_vehicle";

// Sojourns shorter than this are stored as this, keeping them positive.
inline constexpr double kMinSojourn = 1e-6;

// Hyperparameters shared by both agents. Time is in minutes, so
// `discount_rate()` is the continuous rate beta with exp(-beta) = gamma.
struct AgentConfig {
  double gamma = 0.9;
  double reward_bonus = 2.0;
  double epsilon_max = 1.0;
  double epsilon_min = 0.05;
  double epsilon_factor = 0.99995;
  std::size_t learning_starts = 10'000;
  std::size_t update_steps = 10'000;
  std::size_t batch_size = 32;
  std::size_t buffer_capacity = 20'000;
  double learning_rate = 1e-3;
  double leaky_slope = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::vector<std::size_t> hidden = {64, 32};

  double discount_rate() const noexcept;
  std::vector<std::size_t> layer_dims() const;
  void validate() const;
  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

// Running means over consecutive blocks of `block` samples.
class BlockAverager {
 public:
  explicit BlockAverager(std::size_t block = 1000) : block_(block) {}
  void add(double v) {
    sum_ += v;
    if (++count_ == block_) {
      means_.push_back(sum_ / static_cast<double>(block_));
      sum_ = 0.0;
      count_ = 0;
    }
  }
  const std::vector<double>& means() const noexcept { return means_; }

 private:
  std::size_t block_;
  std::size_t count_ = 0;
  double sum_ = 0.0;
  std::vector<double> means_;
};

struct LearningCurves {
  BlockAverager reward;
  BlockAverager q_value;
  BlockAverager loss;
};

// Double-DQN bootstrap target: the online net picks the best next candidate,
// the target net scores it. Terminal transitions return the reward alone.
template <std::floating_point T>
T double_q_target(const Mlp<T>& online, const Mlp<T>& target, const Transition& t, double beta) {
  if (t.terminal || t.next_candidates.empty()) return static_cast<T>(t.reward);
  std::size_t best = 0;
  T best_q = T(0);
  Features<T> x{};
  for (std::size_t i = 0; i < t.next_candidates.size(); ++i) {
    std::copy(t.next_candidates[i].begin(), t.next_candidates[i].end(), x.begin());
    const T q = online.forward(x);
    if (i == 0 || q > best_q) {
      best = i;
      best_q = q;
    }
  }
  std::copy(t.next_candidates[best].begin(), t.next_candidates[best].end(), x.begin());
  const double discount = std::exp(-beta * t.sojourn);
  return static_cast<T>(t.reward + discount * static_cast<double>(target.forward(x)));
}

// One learning decision maker: online and target q-networks, Adam state,
// replay buffer, epsilon schedule, and the transition left open by its last
// decision.
class DqnAgent {
 public:
  DqnAgent(std::string name, AgentConfig cfg, Rng& init_rng);
  DqnAgent(std::string name, AgentConfig cfg, Mlp<float> online);

  const std::string& name() const noexcept { return name_; }
  const AgentConfig& config() const noexcept { return cfg_; }

  // Epsilon-greedy pick; epsilon decays after every decision.
  std::optional<std::size_t> act(std::span<const FeatureVector> candidates, Rng& rng);
  // Argmax of the online network, ties to the lowest index.
  std::optional<std::size_t> greedy(std::span<const FeatureVector> candidates) const;
  float q_value(const FeatureVector& x) const { return online_.forward(x); }

  double epsilon() const noexcept { return epsilon_; }
  void set_epsilon(double e) noexcept { epsilon_ = e; }
  std::uint64_t decisions() const noexcept { return decisions_; }

  // Closes the open transition with this epoch's candidates.
  void begin_epoch(SimTime clock, std::span<const FeatureVector> candidates);
  void open_transition(const FeatureVector& chosen, double reward, SimTime clock);
  // Day boundary: the open transition becomes terminal.
  void end_episode();
  bool has_open_transition() const noexcept { return open_.has_value(); }
  void push(Transition t) { buffer_.push(std::move(t)); }

  // Skipped (nullopt) until the buffer holds `learning_starts` transitions.
  std::optional<float> train_step(Rng& rng);
  void sync_target();

  const ReplayBuffer& buffer() const noexcept { return buffer_; }
  Mlp<float>& online() noexcept { return online_; }
  const Mlp<float>& online() const noexcept { return online_; }
  Mlp<float>& target() noexcept { return target_; }
  const Mlp<float>& target() const noexcept { return target_; }
  std::uint64_t gradient_steps() const noexcept { return gradient_steps_; }
  std::uint64_t steps_since_sync() const noexcept { return steps_since_sync_; }
  LearningCurves& curves() noexcept { return curves_; }
  const LearningCurves& curves() const noexcept { return curves_; }

 private:
  struct OpenTransition {
    FeatureVector state_action;
    float reward;
    SimTime clock;
  };

  std::string name_;
  AgentConfig cfg_;
  Mlp<float> online_;
  Mlp<float> target_;
  Adam<float> adam_;
  ReplayBuffer buffer_;
  double epsilon_;
  std::uint64_t decisions_ = 0;
  std::uint64_t gradient_steps_ = 0;
  std::uint64_t steps_since_sync_ = 0;
  std::optional<OpenTransition> open_;
  LearningCurves curves_;
  std::vector<float> grad_;
  std::vector<Features<float>> batch_inputs_;
  std::vector<RegressionSample<float>> batch_;
};

// Plugs the two agents into the simulator. In training mode every decision
// is recorded and each accepted assignment triggers a gradient step; in
// evaluation mode the frozen online networks act greedily.
class DqnPolicy final : public DispatchPolicy {
 public:
  DqnPolicy(DqnAgent& new_call, DqnAgent& free_vehicle, Rng exploration);
  DqnPolicy(const Mlp<float>& new_call, const Mlp<float>& free_vehicle);

  std::string_view name() const noexcept override { return "dqn"; }
  std::optional<VehicleId> choose_vehicle(const NewCallEpoch& e) override;
  std::optional<CallId> choose_call(const FreeVehicleEpoch& e) override;
  void on_outcome(const DecisionOutcome& outcome) override;
  void on_day_end(SimTime clock) override;

  bool training() const noexcept { return new_call_agent_ != nullptr; }

 private:
  std::optional<std::size_t> decide(DqnAgent* agent, const Mlp<float>& frozen, SimTime clock);

  DqnAgent* new_call_agent_ = nullptr;
  DqnAgent* free_vehicle_agent_ = nullptr;
  const Mlp<float>* new_call_net_ = nullptr;
  const Mlp<float>* free_vehicle_net_ = nullptr;
  Rng rng_;
  std::vector<FeatureVector> candidates_;
  FeatureVector chosen_{};
};

}  // namespace dispatch::rl

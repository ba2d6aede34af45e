#include "dispatch/dqn_agent.hpp"

#include <algorithm>
#include <cmath>

#include "dispatch/errors.hpp"
#include "dispatch/reward.hpp"

namespace dispatch::rl {

double AgentConfig::discount_rate() const noexcept { return dispatch::discount_rate(gamma); }

std::vector<std::size_t> AgentConfig::layer_dims() const {
  std::vector<std::size_t> dims{kFeatureCount};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  return dims;
}

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma", "must lie in (0, 1)");
  if (!std::isfinite(reward_bonus)) throw ConfigError("reward_bonus", "must be finite");
  if (!(epsilon_min >= 0.0 && epsilon_min <= epsilon_max && epsilon_max <= 1.0)) {
    throw ConfigError("epsilon_min", "need 0 <= epsilon_min <= epsilon_max <= 1");
  }
  if (!(epsilon_factor > 0.0 && epsilon_factor <= 1.0)) throw ConfigError("epsilon_factor", "must lie in (0, 1]");
  if (learning_starts == 0) throw ConfigError("learning_starts", "must be positive");
  if (update_steps == 0) throw ConfigError("update_steps", "must be positive");
  if (batch_size == 0) throw ConfigError("batch_size", "must be positive");
  if (buffer_capacity == 0) throw ConfigError("buffer_capacity", "must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate", "must be positive");
  if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) throw ConfigError("leaky_slope", "must lie in [0, 1)");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw ConfigError("adam_beta1", "must lie in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw ConfigError("adam_beta2", "must lie in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon", "must be positive");
  for (auto h : hidden) {
    if (h == 0) throw ConfigError("hidden", "layer widths must be positive");
  }
}

namespace {

AdamConfig<float> adam_config(const AgentConfig& cfg) {
  return {static_cast<float>(cfg.learning_rate), static_cast<float>(cfg.adam_beta1),
          static_cast<float>(cfg.adam_beta2), static_cast<float>(cfg.adam_epsilon)};
}

}  // namespace

DqnAgent::DqnAgent(std::string name, AgentConfig cfg, Rng& init_rng)
    : DqnAgent(std::move(name), cfg, [&] {
        cfg.validate();
        Mlp<float> net(cfg.layer_dims(), static_cast<float>(cfg.leaky_slope));
        net.init_uniform(init_rng);
        return net;
      }()) {}

DqnAgent::DqnAgent(std::string name, AgentConfig cfg, Mlp<float> online)
    : name_(std::move(name)),
      cfg_(std::move(cfg)),
      online_(std::move(online)),
      target_(online_),
      adam_(online_.parameter_count(), adam_config(cfg_)),
      buffer_(cfg_.buffer_capacity),
      epsilon_(cfg_.epsilon_max) {
  cfg_.validate();
  if (online_.input_size() != kFeatureCount) throw Error("agent network must take 15 features");
  grad_.assign(online_.parameter_count(), 0.0f);
}

std::optional<std::size_t> DqnAgent::greedy(std::span<const FeatureVector> candidates) const {
  if (candidates.empty()) return std::nullopt;
  std::size_t best = 0;
  float best_q = online_.forward(candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const float q = online_.forward(candidates[i]);
    if (q > best_q) {
      best = i;
      best_q = q;
    }
  }
  return best;
}

std::optional<std::size_t> DqnAgent::act(std::span<const FeatureVector> candidates, Rng& rng) {
  if (candidates.empty()) return std::nullopt;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::optional<std::size_t> choice;
  if (unit(rng) < epsilon_) {
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    choice = pick(rng);
  } else {
    choice = greedy(candidates);
  }
  ++decisions_;
  epsilon_ = std::max(cfg_.epsilon_min, epsilon_ * cfg_.epsilon_factor);
  return choice;
}

void DqnAgent::begin_epoch(SimTime clock, std::span<const FeatureVector> candidates) {
  if (!open_) return;
  Transition t;
  t.state_action = open_->state_action;
  t.reward = open_->reward;
  t.sojourn = std::max(clock - open_->clock, kMinSojourn);
  t.next_candidates.assign(candidates.begin(), candidates.end());
  t.terminal = candidates.empty();
  buffer_.push(std::move(t));
  open_.reset();
}

void DqnAgent::open_transition(const FeatureVector& chosen, double reward, SimTime clock) {
  open_ = OpenTransition{chosen, static_cast<float>(reward), clock};
  curves_.reward.add(reward);
}

void DqnAgent::end_episode() {
  if (!open_) return;
  Transition t;
  t.state_action = open_->state_action;
  t.reward = open_->reward;
  t.terminal = true;
  buffer_.push(std::move(t));
  open_.reset();
}

std::optional<float> DqnAgent::train_step(Rng& rng) {
  if (buffer_.size() < cfg_.learning_starts) return std::nullopt;
  const double beta = cfg_.discount_rate();
  batch_inputs_.resize(cfg_.batch_size);
  batch_.clear();
  for (std::size_t i = 0; i < cfg_.batch_size; ++i) {
    const Transition& t = buffer_.sample(rng);
    batch_inputs_[i] = t.state_action;
    batch_.push_back({batch_inputs_[i], double_q_target(online_, target_, t, beta)});
  }
  const float loss = batch_loss_and_gradient<float>(online_, batch_, grad_);
  adam_.step(online_.params(), grad_);
  ++gradient_steps_;
  curves_.loss.add(loss);
  if (++steps_since_sync_ >= cfg_.update_steps) sync_target();
  return loss;
}

void DqnAgent::sync_target() {
  target_.copy_parameters_from(online_);
  steps_since_sync_ = 0;
}

DqnPolicy::DqnPolicy(DqnAgent& new_call, DqnAgent& free_vehicle, Rng exploration)
    : new_call_agent_(&new_call),
      free_vehicle_agent_(&free_vehicle),
      new_call_net_(&new_call.online()),
      free_vehicle_net_(&free_vehicle.online()),
      rng_(std::move(exploration)) {}

DqnPolicy::DqnPolicy(const Mlp<float>& new_call, const Mlp<float>& free_vehicle)
    : new_call_net_(&new_call), free_vehicle_net_(&free_vehicle) {}

std::optional<std::size_t> DqnPolicy::decide(DqnAgent* agent, const Mlp<float>& frozen, SimTime clock) {
  if (!agent) {
    if (candidates_.empty()) return std::nullopt;
    std::size_t best = 0;
    float best_q = frozen.forward(candidates_[0]);
    for (std::size_t i = 1; i < candidates_.size(); ++i) {
      const float q = frozen.forward(candidates_[i]);
      if (q > best_q) {
        best = i;
        best_q = q;
      }
    }
    return best;
  }
  agent->begin_epoch(clock, candidates_);
  auto choice = agent->act(candidates_, rng_);
  if (choice) {
    chosen_ = candidates_[*choice];
    agent->curves().q_value.add(agent->q_value(chosen_));
  }
  return choice;
}

std::optional<VehicleId> DqnPolicy::choose_vehicle(const NewCallEpoch& e) {
  candidates_.clear();
  for (const Vehicle& v : e.fleet) candidates_.push_back(featurize<float>(v, e.call, e.context));
  const auto i = decide(new_call_agent_, *new_call_net_, e.context.clock);
  if (!i) return std::nullopt;
  return e.fleet[*i].id;
}

std::optional<CallId> DqnPolicy::choose_call(const FreeVehicleEpoch& e) {
  candidates_.clear();
  for (const Call* c : e.waiting) candidates_.push_back(featurize<float>(e.vehicle, *c, e.context));
  const auto i = decide(free_vehicle_agent_, *free_vehicle_net_, e.context.clock);
  if (!i) return std::nullopt;
  return e.waiting[*i]->id;
}

void DqnPolicy::on_outcome(const DecisionOutcome& outcome) {
  if (!training()) return;
  DqnAgent& agent = outcome.epoch == EpochKind::NewCall ? *new_call_agent_ : *free_vehicle_agent_;
  const bool accepted = outcome.proposal == ProposalOutcome::Accepted;
  double reward = 0.0;
  if (accepted) {
    const AgentConfig& cfg = agent.config();
    reward = discounted_reward(plain_reward(outcome.drive_time, cfg.reward_bonus), cfg.gamma,
                               outcome.pickup_eta + outcome.drive_time);
  }
  agent.open_transition(chosen_, reward, outcome.clock);
  if (accepted) agent.train_step(rng_);
}

void DqnPolicy::on_day_end(SimTime) {
  if (!training()) return;
  new_call_agent_->end_episode();
  free_vehicle_agent_->end_episode();
}

}  // namespace dispatch::rl

#pragma once

#include <cstddef>
#include <vector>

#include "dispatch/errors.hpp"
#include "dispatch/features.hpp"
#include "dispatch/rng.hpp"

namespace dispatch::rl {

struct Transition {
  FeatureVector state_action{};
  float reward = 0.0f;
  // Minutes between this agent's decision and its next one.
  double sojourn = 1.0;
  // Every candidate offered at the next decision; empty when terminal.
  std::vector<FeatureVector> next_candidates;
  bool terminal = false;
};

// Fixed-capacity ring; once full, each push evicts the oldest transition.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("buffer_capacity", "must be positive");
    items_.reserve(std::min<std::size_t>(capacity, 4096));
  }

  void push(Transition t) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(t));
    } else {
      items_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const noexcept { return items_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return items_.empty(); }

  // i-th transition counted from the oldest retained one.
  const Transition& at(std::size_t i) const { return items_.at((head_ + i) % items_.size()); }

  // Uniform draw with replacement.
  const Transition& sample(Rng& rng) const {
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    return items_[pick(rng)];
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Transition> items_;
};

}  // namespace dispatch::rl

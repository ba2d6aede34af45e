#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace dispatch {

using Rng = std::mt19937_64;

// Derives independent, named substreams from one master seed, so that adding
// draws to one consumer never perturbs another.
class StreamFactory {
 public:
  explicit StreamFactory(std::uint64_t master_seed) : seed_(master_seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t derive(std::string_view name,
                       std::initializer_list<std::uint64_t> indices = {}) const noexcept;
  Rng stream(std::string_view name,
             std::initializer_list<std::uint64_t> indices = {}) const {
    return Rng(derive(name, indices));
  }

 private:
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace dispatch

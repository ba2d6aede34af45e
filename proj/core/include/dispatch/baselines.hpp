#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string_view>

#include "dispatch/policy.hpp"
#include "dispatch/rng.hpp"

namespace dispatch {

struct LocatedCandidate {
  std::uint32_t id = 0;
  Coordinate location;
};

// Longest-waiting call: minimal created_at, ties to the lowest id.
std::optional<CallId> fifo_choose_call(std::span<const Call* const> waiting);
// Most recent call: maximal created_at, ties to the lowest id.
std::optional<CallId> lifo_choose_call(std::span<const Call* const> waiting);
// Manhattan-nearest candidate to `anchor`, ties to the lowest id.
std::optional<std::uint32_t> nn_choose(std::span<const LocatedCandidate> candidates,
                                       const Coordinate& anchor);
// Uniform index in [0, n).
std::optional<std::size_t> random_choose(std::size_t n, Rng& rng);

std::optional<VehicleId> nearest_idle_vehicle(std::span<const Vehicle> fleet, const Coordinate& anchor);
std::optional<CallId> nearest_call(std::span<const Call* const> waiting, const Coordinate& anchor);

// FIFO and LIFO only order calls; at new-call epochs they fall back to the
// nearest idle vehicle.
class FifoPolicy final : public DispatchPolicy {
 public:
  std::string_view name() const noexcept override { return "fifo"; }
  std::optional<VehicleId> choose_vehicle(const NewCallEpoch& e) override;
  std::optional<CallId> choose_call(const FreeVehicleEpoch& e) override;
};

class LifoPolicy final : public DispatchPolicy {
 public:
  std::string_view name() const noexcept override { return "lifo"; }
  std::optional<VehicleId> choose_vehicle(const NewCallEpoch& e) override;
  std::optional<CallId> choose_call(const FreeVehicleEpoch& e) override;
};

class NearestNeighborPolicy final : public DispatchPolicy {
 public:
  std::string_view name() const noexcept override { return "nn"; }
  std::optional<VehicleId> choose_vehicle(const NewCallEpoch& e) override;
  std::optional<CallId> choose_call(const FreeVehicleEpoch& e) override;
};

class RandomPolicy final : public DispatchPolicy {
 public:
  explicit RandomPolicy(Rng rng) : rng_(std::move(rng)) {}
  std::string_view name() const noexcept override { return "random"; }
  std::optional<VehicleId> choose_vehicle(const NewCallEpoch& e) override;
  std::optional<CallId> choose_call(const FreeVehicleEpoch& e) override;

 private:
  Rng rng_;
};

bool is_baseline_policy(std::string_view name) noexcept;
// Throws ConfigError for names other than fifo|lifo|nn|random.
std::unique_ptr<DispatchPolicy> make_baseline_policy(std::string_view name, Rng rng);

}  // namespace dispatch

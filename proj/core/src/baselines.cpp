#include "dispatch/baselines.hpp"

#include <limits>
#include <string>

#include "dispatch/errors.hpp"
#include "dispatch/geometry.hpp"

namespace dispatch {

std::string_view to_string(ProposalOutcome o) noexcept {
  switch (o) {
    case ProposalOutcome::Accepted: return "Accepted";
    case ProposalOutcome::DriverRejected: return "DriverRejected";
    case ProposalOutcome::CustomerRejected: return "CustomerRejected";
  }
  return "?";
}

std::optional<CallId> fifo_choose_call(std::span<const Call* const> waiting) {
  const Call* best = nullptr;
  for (const Call* c : waiting) {
    if (!best || c->created_at < best->created_at ||
        (c->created_at == best->created_at && c->id < best->id)) {
      best = c;
    }
  }
  if (!best) return std::nullopt;
  return best->id;
}

std::optional<CallId> lifo_choose_call(std::span<const Call* const> waiting) {
  const Call* best = nullptr;
  for (const Call* c : waiting) {
    if (!best || c->created_at > best->created_at ||
        (c->created_at == best->created_at && c->id < best->id)) {
      best = c;
    }
  }
  if (!best) return std::nullopt;
  return best->id;
}

std::optional<std::uint32_t> nn_choose(std::span<const LocatedCandidate> candidates,
                                       const Coordinate& anchor) {
  std::optional<std::uint32_t> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    const double d = manhattan_distance(c.location, anchor);
    if (!best || d < best_d || (d == best_d && c.id < *best)) {
      best = c.id;
      best_d = d;
    }
  }
  return best;
}

std::optional<std::size_t> random_choose(std::size_t n, Rng& rng) {
  if (n == 0) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  return pick(rng);
}

std::optional<VehicleId> nearest_idle_vehicle(std::span<const Vehicle> fleet, const Coordinate& anchor) {
  std::optional<VehicleId> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& v : fleet) {
    if (v.busy) continue;
    const double d = manhattan_distance(v.location, anchor);
    if (!best || d < best_d || (d == best_d && v.id < *best)) {
      best = v.id;
      best_d = d;
    }
  }
  return best;
}

std::optional<CallId> nearest_call(std::span<const Call* const> waiting, const Coordinate& anchor) {
  std::optional<CallId> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const Call* c : waiting) {
    const double d = manhattan_distance(c->origin, anchor);
    if (!best || d < best_d || (d == best_d && c->id < *best)) {
      best = c->id;
      best_d = d;
    }
  }
  return best;
}

std::optional<VehicleId> FifoPolicy::choose_vehicle(const NewCallEpoch& e) {
  return nearest_idle_vehicle(e.fleet, e.call.origin);
}
std::optional<CallId> FifoPolicy::choose_call(const FreeVehicleEpoch& e) {
  return fifo_choose_call(e.waiting);
}

std::optional<VehicleId> LifoPolicy::choose_vehicle(const NewCallEpoch& e) {
  return nearest_idle_vehicle(e.fleet, e.call.origin);
}
std::optional<CallId> LifoPolicy::choose_call(const FreeVehicleEpoch& e) {
  return lifo_choose_call(e.waiting);
}

std::optional<VehicleId> NearestNeighborPolicy::choose_vehicle(const NewCallEpoch& e) {
  return nearest_idle_vehicle(e.fleet, e.call.origin);
}
std::optional<CallId> NearestNeighborPolicy::choose_call(const FreeVehicleEpoch& e) {
  return nearest_call(e.waiting, e.vehicle.location);
}

std::optional<VehicleId> RandomPolicy::choose_vehicle(const NewCallEpoch& e) {
  auto i = random_choose(e.fleet.size(), rng_);
  if (!i) return std::nullopt;
  return e.fleet[*i].id;
}
std::optional<CallId> RandomPolicy::choose_call(const FreeVehicleEpoch& e) {
  auto i = random_choose(e.waiting.size(), rng_);
  if (!i) return std::nullopt;
  return e.waiting[*i]->id;
}

bool is_baseline_policy(std::string_view name) noexcept {
  return name == "fifo" || name == "lifo" || name == "nn" || name == "random";
}

std::unique_ptr<DispatchPolicy> make_baseline_policy(std::string_view name, Rng rng) {
  if (name == "fifo") return std::make_unique<FifoPolicy>();
  if (name == "lifo") return std::make_unique<LifoPolicy>();
  if (name == "nn") return std::make_unique<NearestNeighborPolicy>();
  if (name == "random") return std::make_unique<RandomPolicy>(std::move(rng));
  throw ConfigError("policies", "unknown baseline policy '" + std::string(name) + "'");
}

}  // namespace dispatch

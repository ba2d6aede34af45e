#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "dispatch/entities.hpp"

namespace dispatch {

// Environment-wide quantities visible at a decision epoch.
struct EpochContext {
  SimTime clock = 0.0;
  // Fleet size over new calls in the trailing 15 minutes (1 when none).
  double resource_demand_ratio = 1.0;
  double minute_of_week = 0.0;
  double speed = 1.0;
};

// A new call arrived; candidates are every vehicle in the fleet, busy or not.
struct NewCallEpoch {
  EpochContext context;
  const Call& call;
  std::span<const Vehicle> fleet;
};

// A vehicle became free; candidates are the waiting calls, oldest first.
struct FreeVehicleEpoch {
  EpochContext context;
  const Vehicle& vehicle;
  std::span<const Call* const> waiting;
};

enum class EpochKind { NewCall, FreeVehicle };
enum class ProposalOutcome { Accepted, DriverRejected, CustomerRejected };

std::string_view to_string(ProposalOutcome o) noexcept;

// What happened to the choice a policy just made.
struct DecisionOutcome {
  EpochKind epoch = EpochKind::NewCall;
  // Empty when the chosen vehicle was busy and the call was queued instead.
  std::optional<ProposalOutcome> proposal;
  Minutes pickup_eta = 0.0;
  Minutes drive_time = 0.0;
  SimTime clock = 0.0;
};

// Decision maker for both epoch kinds. A returned id must belong to the
// offered candidate set; returning nothing is reserved for empty (or, for
// idle-only rules, all-busy) candidate sets.
class DispatchPolicy {
 public:
  virtual ~DispatchPolicy() = default;

  virtual std::string_view name() const noexcept = 0;
  virtual std::optional<VehicleId> choose_vehicle(const NewCallEpoch& epoch) = 0;
  virtual std::optional<CallId> choose_call(const FreeVehicleEpoch& epoch) = 0;

  virtual void on_outcome(const DecisionOutcome&) {}
  virtual void on_day_end(SimTime) {}
};

}  // namespace dispatch

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "dispatch/geometry.hpp"

namespace dispatch {

using CallId = std::uint32_t;
using VehicleId = std::uint32_t;

enum class CallStatus : std::uint8_t { Waiting, Assigned, PickedUp, Completed, Canceled };

std::string_view to_string(CallStatus s) noexcept;

// Allowed lifecycle edges: Waiting->Assigned->PickedUp->Completed,
// Waiting->Canceled and Assigned->Waiting.
bool is_allowed_transition(CallStatus from, CallStatus to) noexcept;

// True iff `history` starts at Waiting and every consecutive pair is an
// allowed edge.
bool is_valid_status_path(std::span<const CallStatus> history) noexcept;

struct Call {
  CallId id = 0;
  SimTime created_at = 0.0;
  Coordinate origin;
  Coordinate destination;
  Minutes max_wait = 0.0;
  CallStatus status = CallStatus::Waiting;
  std::optional<VehicleId> assigned_vehicle;
  std::optional<SimTime> assigned_at;
  std::optional<SimTime> pickup_time;
  std::optional<SimTime> completion_time;

  Minutes waited(SimTime clock) const noexcept { return clock - created_at; }
};

struct Vehicle {
  VehicleId id = 0;
  Coordinate location;
  Coordinate move_destination;
  bool busy = false;
  // Absolute time the current trip ends; equals the last idle time otherwise.
  SimTime free_at = 0.0;
  double reject_prob = 0.0;
  std::optional<SimTime> reposition_hold_until;

  Minutes time_to_free(SimTime clock) const noexcept {
    return busy && free_at > clock ? free_at - clock : 0.0;
  }
};

struct TripRecord {
  int minute_of_week = 0;
  Coordinate origin;
  Coordinate destination;

  int day_of_week() const noexcept { return minute_of_week / kMinutesPerDay; }
  friend bool operator==(const TripRecord&, const TripRecord&) = default;
};

}  // namespace dispatch

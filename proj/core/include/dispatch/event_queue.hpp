#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <string_view>
#include <vector>

#include "dispatch/entities.hpp"
#include "dispatch/geometry.hpp"

namespace dispatch {

enum class EventKind : std::uint8_t {
  NewCall,
  FreeVehicle,
  Cancellation,
  ArrivalAtOrigin,
  ArrivalAtDestination,
  RepositionTimeout,
};

std::string_view to_string(EventKind k) noexcept;

struct SimEvent {
  SimTime time = 0.0;
  EventKind kind = EventKind::NewCall;
  // Ids not used by the kind are left at zero.
  VehicleId vehicle = 0;
  CallId call = 0;
  std::uint64_t seq = 0;
};

// Min-queue on (time, seq). Sequence numbers are assigned on push, so events
// at equal times pop in insertion order.
class EventQueue {
 public:
  // Throws CausalityError when `e.time` precedes the last popped time.
  std::uint64_t push(SimEvent e);
  std::optional<SimEvent> pop();
  const SimEvent* peek() const { return heap_.empty() ? nullptr : &heap_.top(); }

  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }
  SimTime clock() const noexcept { return clock_; }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const noexcept {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
  std::uint64_t next_seq_ = 1;
  SimTime clock_ = 0.0;
};

}  // namespace dispatch

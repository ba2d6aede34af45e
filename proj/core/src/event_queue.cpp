#include "dispatch/event_queue.hpp"

#include <cmath>
#include <string>

#include "dispatch/errors.hpp"

namespace dispatch {

std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::NewCall: return "NewCall";
    case EventKind::FreeVehicle: return "FreeVehicle";
    case EventKind::Cancellation: return "Cancellation";
    case EventKind::ArrivalAtOrigin: return "ArrivalAtOrigin";
    case EventKind::ArrivalAtDestination: return "ArrivalAtDestination";
    case EventKind::RepositionTimeout: return "RepositionTimeout";
  }
  return "?";
}

std::uint64_t EventQueue::push(SimEvent e) {
  if (!std::isfinite(e.time) || e.time < clock_) {
    throw CausalityError("event " + std::string(to_string(e.kind)) + " at t=" +
                         std::to_string(e.time) + " precedes clock " + std::to_string(clock_));
  }
  e.seq = next_seq_++;
  heap_.push(e);
  return e.seq;
}

std::optional<SimEvent> EventQueue::pop() {
  if (heap_.empty()) return std::nullopt;
  SimEvent e = heap_.top();
  heap_.pop();
  clock_ = e.time;
  return e;
}

}  // namespace dispatch

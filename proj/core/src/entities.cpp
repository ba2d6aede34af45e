#include "dispatch/entities.hpp"

namespace dispatch {

std::string_view to_string(CallStatus s) noexcept {
  switch (s) {
    case CallStatus::Waiting: return "Waiting";
    case CallStatus::Assigned: return "Assigned";
    case CallStatus::PickedUp: return "PickedUp";
    case CallStatus::Completed: return "Completed";
    case CallStatus::Canceled: return "Canceled";
  }
  return "?";
}

bool is_allowed_transition(CallStatus from, CallStatus to) noexcept {
  using S = CallStatus;
  switch (from) {
    case S::Waiting: return to == S::Assigned || to == S::Canceled;
    case S::Assigned: return to == S::PickedUp || to == S::Waiting;
    case S::PickedUp: return to == S::Completed;
    case S::Completed:
    case S::Canceled: return false;
  }
  return false;
}

bool is_valid_status_path(std::span<const CallStatus> history) noexcept {
  if (history.empty() || history.front() != CallStatus::Waiting) return false;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (!is_allowed_transition(history[i - 1], history[i])) return false;
  }
  return true;
}

}  // namespace dispatch

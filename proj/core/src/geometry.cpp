#include "dispatch/geometry.hpp"

#include <cmath>

#include "dispatch/errors.hpp"

namespace dispatch {

double manhattan_distance(const Coordinate& a, const Coordinate& b) noexcept {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

Minutes travel_time(double distance, double speed) {
  if (!(speed > 0.0) || !std::isfinite(speed)) {
    throw ConfigError("speed", "must be a positive finite number");
  }
  return distance / speed;
}

double minute_of_week(SimTime t, Minutes week_origin_offset) noexcept {
  double m = std::fmod(t + week_origin_offset, static_cast<double>(kMinutesPerWeek));
  if (m < 0.0) m += kMinutesPerWeek;
  return m;
}

}  // namespace dispatch

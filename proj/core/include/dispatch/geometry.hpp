#pragma once

#include <cmath>

namespace dispatch {

// Simulation time in minutes since the start of the simulated day.
using SimTime = double;
using Minutes = double;

inline constexpr int kMinutesPerDay = 1440;
inline constexpr int kMinutesPerWeek = 10080;

struct Coordinate {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Coordinate&, const Coordinate&) = default;
};

struct BoundingBox {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  bool contains(const Coordinate& c) const noexcept {
    return std::isfinite(c.x) && std::isfinite(c.y) && c.x >= x_min &&
           c.x <= x_max && c.y >= y_min && c.y <= y_max;
  }
  // Maps a point of this box onto the unit square.
  Coordinate normalize(const Coordinate& c) const noexcept {
    return {(c.x - x_min) / (x_max - x_min), (c.y - y_min) / (y_max - y_min)};
  }
  bool valid() const noexcept {
    return std::isfinite(x_min) && std::isfinite(x_max) &&
           std::isfinite(y_min) && std::isfinite(y_max) && x_min < x_max &&
           y_min < y_max;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline constexpr BoundingBox kUnitBox{};

double manhattan_distance(const Coordinate& a, const Coordinate& b) noexcept;

// Minutes needed to cover `distance` box units at `speed` units per minute.
// Throws ConfigError when speed is not strictly positive.
Minutes travel_time(double distance, double speed);

// (t + offset) mod 10080, always in [0, 10080).
double minute_of_week(SimTime t, Minutes week_origin_offset = 0.0) noexcept;

}  // namespace dispatch

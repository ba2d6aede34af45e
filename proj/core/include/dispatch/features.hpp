#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numbers>

#include "dispatch/entities.hpp"
#include "dispatch/policy.hpp"

namespace dispatch {

inline constexpr std::size_t kVehicleFeatures = 7;
inline constexpr std::size_t kCallFeatures = 5;
inline constexpr std::size_t kContextFeatures = 3;
inline constexpr std::size_t kFeatureCount = kVehicleFeatures + kCallFeatures + kContextFeatures;

template <std::floating_point T>
using Features = std::array<T, kFeatureCount>;
using FeatureVector = Features<float>;

// Layout: vehicle x, y, destination x, y, minutes to free, rejection
// probability, busy flag; call origin x, y, destination x, y, minutes waited so
// far; fleet/demand ratio, sin and cos of the week phase.
template <std::floating_point T = float>
Features<T> featurize(const Vehicle& v, const Call& c, const EpochContext& ctx) {
  const double phase = 2.0 * std::numbers::pi * (ctx.minute_of_week / kMinutesPerWeek);
  const Coordinate dest = v.busy ? v.move_destination : v.location;
  return {
      static_cast<T>(v.location.x),
      static_cast<T>(v.location.y),
      static_cast<T>(dest.x),
      static_cast<T>(dest.y),
      static_cast<T>(v.time_to_free(ctx.clock)),
      static_cast<T>(v.reject_prob),
      static_cast<T>(v.busy ? 1.0 : 0.0),
      static_cast<T>(c.origin.x),
      static_cast<T>(c.origin.y),
      static_cast<T>(c.destination.x),
      static_cast<T>(c.destination.y),
      static_cast<T>(c.waited(ctx.clock)),
      static_cast<T>(ctx.resource_demand_ratio),
      static_cast<T>(std::sin(phase)),
      static_cast<T>(std::cos(phase)),
  };
}

}  // namespace dispatch

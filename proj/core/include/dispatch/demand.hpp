#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "dispatch/entities.hpp"
#include "dispatch/geometry.hpp"
#include "dispatch/rng.hpp"

namespace dispatch {

inline constexpr int kHoursPerWeek = 168;

// Axis-aligned isotropic Gaussian component of the synthetic spatial sampler.
struct GaussianCluster {
  Coordinate center;
  double sigma = 0.1;
  double weight = 1.0;

  friend bool operator==(const GaussianCluster&, const GaussianCluster&) = default;
};

// Samples points in the unit square: uniform when `clusters` is empty,
// otherwise a mixture of Gaussians truncated to the square.
struct SpatialModel {
  std::vector<GaussianCluster> clusters;

  Coordinate sample(Rng& rng) const;
  void validate() const;
};

enum class DemandMode { Records, Synthetic };

struct DemandSource {
  DemandMode mode = DemandMode::Synthetic;
  std::vector<TripRecord> records;
  // Calls per hour, indexed by hour of week (Monday 00:00 is hour 0).
  std::array<double, kHoursPerWeek> hourly_rates{};
  SpatialModel spatial;
  // Half-width of the uniform arrival jitter applied to resampled records.
  Minutes jitter = 15.0;

  static DemandSource from_records(std::vector<TripRecord> records, Minutes jitter = 15.0);
  static DemandSource synthetic(const std::array<double, kHoursPerWeek>& hourly_rates,
                                SpatialModel spatial);

  // Throws ConfigError / EmptyDemandError when the invariants do not hold.
  void validate() const;
};

struct StochasticConfig {
  double tolerance_shape = 2.0;
  double tolerance_scale = 4.0;
  double reject_alpha = 2.0;
  double reject_beta = 8.0;

  void validate() const;
  friend bool operator==(const StochasticConfig&, const StochasticConfig&) = default;
};

// A call before the simulator assigns it an id and a tolerance.
struct CallPrototype {
  SimTime arrival = 0.0;
  Coordinate origin;
  Coordinate destination;
};

struct TripLoadResult {
  std::vector<TripRecord> records;
  std::size_t dropped = 0;
};

// Reads the trip CSV (`minute_of_week,origin_x,origin_y,dest_x,dest_y`).
// Rows with a point outside `box` are dropped and counted; kept points are
// normalized onto the unit square. Throws ParseError (with line number) on
// malformed input and EmptyDemandError when nothing survives.
TripLoadResult load_trip_records(std::istream& in, const BoundingBox& box = kUnitBox);
TripLoadResult load_trip_records(const std::filesystem::path& path,
                                 const BoundingBox& box = kUnitBox);

// Time-ordered arrivals in [0, 1440) for one day of the week (0 = Monday).
// Records mode resamples that day's rows with replacement and jitters their
// time; Synthetic mode thins a homogeneous Poisson stream against the day's
// hourly rates. At most `daily_cap` calls are returned; when more arrive a
// uniform subset is kept.
std::vector<CallPrototype> generate_daily_calls(const DemandSource& source, int day_of_week,
                                                std::size_t daily_cap, Rng& rng);

Minutes sample_tolerance(const StochasticConfig& cfg, Rng& rng);
double sample_rejection_prob(const StochasticConfig& cfg, Rng& rng);

}  // namespace dispatch

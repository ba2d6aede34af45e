#include "dispatch/demand.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <numeric>
#include <string>
#include <string_view>

#include "dispatch/errors.hpp"

namespace dispatch {
namespace {

constexpr std::string_view kTripHeader = "minute_of_week,origin_x,origin_y,dest_x,dest_y";

template <typename T>
bool parse_number(std::string_view field, T& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

// Forces strictly increasing times; ties between continuous draws are
// practically impossible but would break the ordering contract.
void make_strictly_increasing(std::vector<CallPrototype>& calls) {
  for (std::size_t i = 1; i < calls.size(); ++i) {
    if (calls[i].arrival <= calls[i - 1].arrival) {
      calls[i].arrival = std::nextafter(calls[i - 1].arrival, kMinutesPerDay);
    }
  }
}

void apply_cap(std::vector<CallPrototype>& calls, std::size_t cap, Rng& rng) {
  if (calls.size() <= cap) return;
  std::vector<CallPrototype> kept;
  kept.reserve(cap);
  std::sample(calls.begin(), calls.end(), std::back_inserter(kept), cap, rng);
  calls = std::move(kept);
}

}  // namespace

Coordinate SpatialModel::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (clusters.empty()) return {unit(rng), unit(rng)};

  std::vector<double> weights;
  weights.reserve(clusters.size());
  for (const auto& c : clusters) weights.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  const auto& cluster = clusters[pick(rng)];
  std::normal_distribution<double> nx(cluster.center.x, cluster.sigma);
  std::normal_distribution<double> ny(cluster.center.y, cluster.sigma);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Coordinate c{nx(rng), ny(rng)};
    if (kUnitBox.contains(c)) return c;
  }
  return {std::clamp(cluster.center.x, 0.0, 1.0), std::clamp(cluster.center.y, 0.0, 1.0)};
}

void SpatialModel::validate() const {
  double total = 0.0;
  for (const auto& c : clusters) {
    if (!kUnitBox.contains(c.center)) throw ConfigError("clusters", "center outside unit box");
    if (!(c.sigma > 0.0)) throw ConfigError("clusters", "sigma must be positive");
    if (!(c.weight >= 0.0)) throw ConfigError("clusters", "weight must be nonnegative");
    total += c.weight;
  }
  if (!clusters.empty() && !(total > 0.0)) {
    throw ConfigError("clusters", "at least one weight must be positive");
  }
}

DemandSource DemandSource::from_records(std::vector<TripRecord> records, Minutes jitter) {
  DemandSource s;
  s.mode = DemandMode::Records;
  s.records = std::move(records);
  s.jitter = jitter;
  s.validate();
  return s;
}

DemandSource DemandSource::synthetic(const std::array<double, kHoursPerWeek>& hourly_rates,
                                     SpatialModel spatial) {
  DemandSource s;
  s.mode = DemandMode::Synthetic;
  s.hourly_rates = hourly_rates;
  s.spatial = std::move(spatial);
  s.validate();
  return s;
}

void DemandSource::validate() const {
  if (mode == DemandMode::Records) {
    if (records.empty()) throw EmptyDemandError("demand source has no trip records");
    if (!(jitter >= 0.0)) throw ConfigError("jitter_minutes", "must be nonnegative");
    return;
  }
  bool any_positive = false;
  for (double r : hourly_rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("hourly_profile", "rates must be finite and nonnegative");
    any_positive = any_positive || r > 0.0;
  }
  if (!any_positive) throw EmptyDemandError("synthetic demand has no positive hourly rate");
  spatial.validate();
}

void StochasticConfig::validate() const {
  auto check = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be strictly positive");
  };
  check(tolerance_shape, "tolerance_shape");
  check(tolerance_scale, "tolerance_scale");
  check(reject_alpha, "reject_alpha");
  check(reject_beta, "reject_beta");
}

TripLoadResult load_trip_records(std::istream& in, const BoundingBox& box) {
  if (!box.valid()) throw ConfigError("box", "bounding box must have positive extent");
  TripLoadResult result;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line != kTripHeader) throw ParseError(line_no, "expected header '" + std::string(kTripHeader) + "'");
      have_header = true;
      continue;
    }
    if (line.empty()) continue;

    auto fields = split_fields(line);
    if (fields.size() != 5) throw ParseError(line_no, "expected 5 fields, got " + std::to_string(fields.size()));
    TripRecord rec;
    if (!parse_number(fields[0], rec.minute_of_week)) throw ParseError(line_no, "bad minute_of_week");
    if (rec.minute_of_week < 0 || rec.minute_of_week >= kMinutesPerWeek) {
      throw ParseError(line_no, "minute_of_week out of range [0, 10080)");
    }
    double v[4];
    for (int i = 0; i < 4; ++i) {
      if (!parse_number(fields[i + 1], v[i]) || !std::isfinite(v[i])) {
        throw ParseError(line_no, "bad coordinate in field " + std::to_string(i + 2));
      }
    }
    Coordinate origin{v[0], v[1]};
    Coordinate dest{v[2], v[3]};
    if (!box.contains(origin) || !box.contains(dest)) {
      ++result.dropped;
      continue;
    }
    rec.origin = box.normalize(origin);
    rec.destination = box.normalize(dest);
    result.records.push_back(rec);
  }
  if (!have_header) throw ParseError(line_no + 1, "missing header");
  if (result.records.empty()) throw EmptyDemandError("no trip records inside the bounding box");
  return result;
}

TripLoadResult load_trip_records(const std::filesystem::path& path, const BoundingBox& box) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trip file " + path.string());
  return load_trip_records(in, box);
}

std::vector<CallPrototype> generate_daily_calls(const DemandSource& source, int day_of_week,
                                                std::size_t daily_cap, Rng& rng) {
  if (daily_cap < 1) throw ConfigError("daily_calls", "must be at least 1");
  if (day_of_week < 0 || day_of_week > 6) throw ConfigError("day_of_week", "must be in 0..6");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<CallPrototype> calls;

  if (source.mode == DemandMode::Records) {
    std::vector<const TripRecord*> rows;
    for (const auto& r : source.records) {
      if (r.day_of_week() == day_of_week) rows.push_back(&r);
    }
    if (rows.empty()) {
      throw EmptyDemandError("no trip records for day of week " + std::to_string(day_of_week));
    }
    const std::size_t n = std::min(daily_cap, rows.size());
    std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
    std::uniform_real_distribution<double> jitter(-source.jitter, source.jitter);
    calls.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const TripRecord& r = *rows[pick(rng)];
      const double base = r.minute_of_week % kMinutesPerDay;
      double t = base;
      if (source.jitter > 0.0) {
        // Truncated jitter: redraw until the time lands inside the day.
        do {
          t = base + jitter(rng);
        } while (t < 0.0 || t >= kMinutesPerDay);
      }
      calls.push_back({t, r.origin, r.destination});
    }
    std::sort(calls.begin(), calls.end(),
              [](const CallPrototype& a, const CallPrototype& b) { return a.arrival < b.arrival; });
  } else {
    const auto first = source.hourly_rates.begin() + day_of_week * 24;
    const double peak = *std::max_element(first, first + 24);
    if (peak <= 0.0) return calls;
    std::exponential_distribution<double> gap(peak / 60.0);
    double t = 0.0;
    while (true) {
      t += gap(rng);
      if (t >= kMinutesPerDay) break;
      const double rate = first[static_cast<int>(t / 60.0)];
      if (unit(rng) * peak < rate) {
        Coordinate o = source.spatial.sample(rng);
        Coordinate d = source.spatial.sample(rng);
        calls.push_back({t, o, d});
      }
    }
  }
  apply_cap(calls, daily_cap, rng);
  make_strictly_increasing(calls);
  return calls;
}

Minutes sample_tolerance(const StochasticConfig& cfg, Rng& rng) {
  std::gamma_distribution<double> gamma(cfg.tolerance_shape, cfg.tolerance_scale);
  double w = 0.0;
  do {
    w = gamma(rng);
  } while (!(w > 0.0));
  return w;
}

double sample_rejection_prob(const StochasticConfig& cfg, Rng& rng) {
  std::gamma_distribution<double> ga(cfg.reject_alpha, 1.0);
  std::gamma_distribution<double> gb(cfg.reject_beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  if (x + y <= 0.0) return 0.5;
  return std::clamp(x / (x + y), 0.0, 1.0);
}

}  // namespace dispatch

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dispatch/simulation.hpp"

namespace dispatch {

// One evaluated (policy, scenario, day, replicate) run.
struct DayRecord {
  std::string date;
  std::string policy;
  std::string scenario;
  std::uint64_t created = 0;
  std::uint64_t served = 0;
  std::uint64_t canceled = 0;
  double avg_delay_min = 0.0;
  double cancel_rate = 0.0;
  double total_service_min = 0.0;
  std::uint64_t seed = 0;

  static DayRecord from_metrics(std::string date, std::string scenario, const DayMetrics& m);
};

inline constexpr std::string_view kPerDayHeader =
    "date,policy,scenario,created,served,canceled,avg_delay_min,cancel_rate,total_service_min,seed";
inline constexpr std::string_view kReportHeader = "policy,scenario,metric,mean,ci_low,ci_high,n";

void write_per_day_csv(std::ostream& out, std::span<const DayRecord> rows);
std::vector<DayRecord> read_per_day_csv(std::istream& in);

struct Interval {
  double mean = 0.0;
  double half_width = 0.0;
};

// mean +- 1.96 * sample sd / sqrt(n); zero width for n < 2.
Interval confidence_interval(std::span<const double> values);

struct MetricSummary {
  std::string policy;
  std::string scenario;
  std::string metric;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};

struct Report {
  // Sorted by (policy, scenario, metric).
  std::vector<MetricSummary> rows;

  const MetricSummary* find(std::string_view policy, std::string_view scenario, std::string_view metric) const;
};

// Aggregates avg_delay_min, cancel_rate and total_service_min per policy and
// scenario over all days.
Report aggregate(std::span<const DayRecord> rows);

enum class ReportFormat { Csv, Text };

void write_report(std::ostream& out, const Report& report, ReportFormat format);
// Throws Error when the report is empty or the path is not writable.
void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& path);

}  // namespace dispatch

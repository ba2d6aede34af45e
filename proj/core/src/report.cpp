#include "dispatch/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>

#include "dispatch/errors.hpp"

namespace dispatch {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_field(const std::string& s, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError(line, "bad numeric field '" + s + "'");
  return v;
}

}  // namespace

DayRecord DayRecord::from_metrics(std::string date, std::string scenario, const DayMetrics& m) {
  DayRecord r;
  r.date = std::move(date);
  r.policy = m.new_call_policy;
  r.scenario = std::move(scenario);
  r.created = m.calls_created;
  r.served = m.calls_served;
  r.canceled = m.calls_canceled;
  r.avg_delay_min = m.average_delay();
  r.cancel_rate = m.cancel_rate();
  r.total_service_min = m.sum_service_time;
  r.seed = m.seed;
  return r;
}

void write_per_day_csv(std::ostream& out, std::span<const DayRecord> rows) {
  out << kPerDayHeader << '\n';
  for (const auto& r : rows) {
    out << r.date << ',' << r.policy << ',' << r.scenario << ',' << r.created << ',' << r.served << ','
        << r.canceled << ',' << fmt(r.avg_delay_min) << ',' << fmt(r.cancel_rate) << ','
        << fmt(r.total_service_min) << ',' << r.seed << '\n';
  }
}

std::vector<DayRecord> read_per_day_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != kPerDayHeader) throw ParseError(line_no, "expected per-day CSV header");
  std::vector<DayRecord> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 10) throw ParseError(line_no, "expected 10 fields");
    DayRecord r;
    r.date = f[0];
    r.policy = f[1];
    r.scenario = f[2];
    r.created = parse_field<std::uint64_t>(f[3], line_no);
    r.served = parse_field<std::uint64_t>(f[4], line_no);
    r.canceled = parse_field<std::uint64_t>(f[5], line_no);
    r.avg_delay_min = parse_field<double>(f[6], line_no);
    r.cancel_rate = parse_field<double>(f[7], line_no);
    r.total_service_min = parse_field<double>(f[8], line_no);
    r.seed = parse_field<std::uint64_t>(f[9], line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

Interval confidence_interval(std::span<const double> values) {
  Interval ci;
  if (values.empty()) return ci;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double n = static_cast<double>(values.size());
  ci.mean = sum / n;
  if (values.size() < 2) return ci;
  double ss = 0.0;
  for (double v : values) ss += (v - ci.mean) * (v - ci.mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  ci.half_width = 1.96 * sd / std::sqrt(n);
  return ci;
}

const MetricSummary* Report::find(std::string_view policy, std::string_view scenario,
                                  std::string_view metric) const {
  for (const auto& r : rows) {
    if (r.policy == policy && r.scenario == scenario && r.metric == metric) return &r;
  }
  return nullptr;
}

Report aggregate(std::span<const DayRecord> rows) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::vector<double>> groups;
  for (const auto& r : rows) {
    groups[{r.policy, r.scenario, "avg_delay_min"}].push_back(r.avg_delay_min);
    groups[{r.policy, r.scenario, "cancel_rate"}].push_back(r.cancel_rate);
    groups[{r.policy, r.scenario, "total_service_min"}].push_back(r.total_service_min);
  }
  Report report;
  for (const auto& [key, values] : groups) {
    const auto ci = confidence_interval(values);
    report.rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), ci.mean,
                           ci.mean - ci.half_width, ci.mean + ci.half_width, values.size()});
  }
  return report;
}

void write_report(std::ostream& out, const Report& report, ReportFormat format) {
  if (format == ReportFormat::Csv) {
    out << kReportHeader << '\n';
    for (const auto& r : report.rows) {
      out << r.policy << ',' << r.scenario << ',' << r.metric << ',' << fmt(r.mean) << ',' << fmt(r.ci_low) << ','
          << fmt(r.ci_high) << ',' << r.n << '\n';
    }
    return;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %-10s %-18s %14s %14s %14s %5s\n", "policy", "scenario", "metric", "mean",
                "ci_low", "ci_high", "n");
  out << buf;
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%-8s %-10s %-18s %14.4f %14.4f %14.4f %5zu\n", r.policy.c_str(),
                  r.scenario.c_str(), r.metric.c_str(), r.mean, r.ci_low, r.ci_high, r.n);
    out << buf;
  }
}

void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& path) {
  if (report.rows.empty()) throw Error("refusing to write an empty report");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write report " + path.string());
  write_report(out, report, format);
  if (!out) throw Error("failed writing report " + path.string());
}

}  // namespace dispatch

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dispatch/demand.hpp"
#include "dispatch/dqn_agent.hpp"
#include "dispatch/geometry.hpp"

namespace dispatch {

// Fleet size as a share of the daily call volume.
struct Scenario {
  std::string name;
  double fleet_ratio = 0.0;

  std::size_t fleet_size(std::size_t daily_calls) const;
};

// very_easy 3%, easy 2%, medium 1%, hard 0.5%.
const std::vector<Scenario>& standard_scenarios();
const Scenario& scenario_by_name(std::string_view name);

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t daily_calls = 1000;
  std::size_t eval_daily_calls = 2000;
  std::size_t training_days = 31;
  std::size_t repetitions = 3;
  std::vector<std::string> scenarios = {"very_easy", "easy", "medium", "hard"};
  std::size_t eval_days = 28;
  std::size_t eval_seeds = 1;
  std::vector<std::string> policies = {"fifo", "lifo", "nn", "random", "dqn"};
  std::string train_start_date = "2022-01-01";
  std::string eval_start_date = "2022-02-01";

  DemandMode demand_mode = DemandMode::Synthetic;
  std::string train_records;
  std::string eval_records;
  // Relative call intensity per hour: 24 values (same every day) or 168.
  std::vector<double> hourly_profile = {0.9, 0.6, 0.4, 0.3, 0.3, 0.5, 0.9, 1.3, 1.5, 1.3, 1.2, 1.2,
                                        1.2, 1.2, 1.3, 1.5, 1.6, 1.7, 1.8, 1.7, 1.5, 1.4, 1.3, 1.1};
  // Empty means uniform origins and destinations.
  std::vector<GaussianCluster> clusters = {
      {{0.30, 0.35}, 0.12, 0.40}, {{0.70, 0.65}, 0.12, 0.35}, {{0.60, 0.25}, 0.15, 0.25}};
  Minutes jitter_minutes = 15.0;

  StochasticConfig stochastic;
  rl::AgentConfig agent;

  double speed = 0.04;
  BoundingBox box;
  Minutes hold_minutes = 5.0;
  std::uint64_t event_ceiling = 100'000'000;
  std::size_t threads = 0;  // 0: hardware concurrency
  std::string out_dir = "out";
  std::string checkpoint_dir;  // empty: out_dir
  bool trace = false;

  std::filesystem::path checkpoint_path(std::string_view agent) const;
  // Throws ConfigError naming the first invalid key.
  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Flat `key=value` lines; `#` starts a comment. Unknown keys are rejected and
// `seed` is required; everything else falls back to its default.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::filesystem::path& path);
// Every key, one per line, in a form parse_config reads back to an equal
// config.
std::string serialize_config(const ExperimentConfig& cfg);

// Calendar helpers for `YYYY-MM-DD` dates.
std::string add_days(std::string_view date, int days);
// 0 = Monday.
int day_of_week(std::string_view date);

}  // namespace dispatch

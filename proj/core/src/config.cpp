#include "dispatch/config.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "dispatch/baselines.hpp"
#include "dispatch/errors.hpp"

namespace dispatch {

std::size_t Scenario::fleet_size(std::size_t daily_calls) const {
  const auto n = static_cast<long long>(std::llround(fleet_ratio * static_cast<double>(daily_calls)));
  return static_cast<std::size_t>(std::max(1LL, n));
}

const std::vector<Scenario>& standard_scenarios() {
  static const std::vector<Scenario> kScenarios = {
      {"very_easy", 0.03}, {"easy", 0.02}, {"medium", 0.01}, {"hard", 0.005}};
  return kScenarios;
}

const Scenario& scenario_by_name(std::string_view name) {
  for (const auto& s : standard_scenarios()) {
    if (s.name == name) return s;
  }
  throw ConfigError("scenarios", "unknown scenario '" + std::string(name) + "'");
}

std::filesystem::path ExperimentConfig::checkpoint_path(std::string_view agent_name) const {
  const std::filesystem::path dir = checkpoint_dir.empty() ? out_dir : checkpoint_dir;
  return dir / (std::string(agent_name) + ".ckpt");
}

namespace {

std::chrono::year_month_day parse_date(std::string_view s) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  const std::string str(s);
  if (str.size() != 10 || std::sscanf(str.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    throw ConfigError("date", "expected YYYY-MM-DD, got '" + str + "'");
  }
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw ConfigError("date", "invalid calendar date '" + str + "'");
  return ymd;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw ConfigError(key, "expected a number, got '" + std::string(v) + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, std::string_view v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError(key, "expected a nonnegative integer, got '" + std::string(v) + "'");
  }
  return out;
}

bool to_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + std::string(v) + "'");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& items, char sep, std::function<std::string(const T&)> fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += fmt(items[i]);
  }
  return out;
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&, std::string_view)> parse;
  std::function<std::string(const ExperimentConfig&)> format;
};

template <typename Member>
Field double_field(Member member) {
  return {[member](ExperimentConfig& c, const std::string& k, std::string_view v) { member(c) = to_double(k, v); },
          [member](const ExperimentConfig& c) { return fmt_double(member(c)); }};
}

template <typename Member>
Field uint_field(Member member) {
  return {[member](ExperimentConfig& c, const std::string& k, std::string_view v) {
            member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(to_uint(k, v));
          },
          [member](const ExperimentConfig& c) { return std::to_string(member(c)); }};
}

template <typename Member>
Field string_field(Member member) {
  return {[member](ExperimentConfig& c, const std::string&, std::string_view v) { member(c) = std::string(v); },
          [member](const ExperimentConfig& c) { return member(c); }};
}

template <typename Member>
Field list_field(Member member) {
  return {[member](ExperimentConfig& c, const std::string&, std::string_view v) { member(c) = split(v, ','); },
          [member](const ExperimentConfig& c) {
            return join<std::string>(member(c), ',',
                                     [](const std::string& s) { return s; });
          }};
}

// Ordered so serialization is stable.
const std::vector<std::pair<std::string, Field>>& fields() {
  using C = ExperimentConfig;
  static const std::vector<std::pair<std::string, Field>> kFields = {
      {"seed", uint_field([](auto& c) -> auto& { return c.seed; })},
      {"daily_calls", uint_field([](auto& c) -> auto& { return c.daily_calls; })},
      {"eval_daily_calls", uint_field([](auto& c) -> auto& { return c.eval_daily_calls; })},
      {"training_days", uint_field([](auto& c) -> auto& { return c.training_days; })},
      {"repetitions", uint_field([](auto& c) -> auto& { return c.repetitions; })},
      {"scenarios", list_field([](auto& c) -> auto& { return c.scenarios; })},
      {"eval_days", uint_field([](auto& c) -> auto& { return c.eval_days; })},
      {"eval_seeds", uint_field([](auto& c) -> auto& { return c.eval_seeds; })},
      {"policies", list_field([](auto& c) -> auto& { return c.policies; })},
      {"train_start_date", string_field([](auto& c) -> auto& { return c.train_start_date; })},
      {"eval_start_date", string_field([](auto& c) -> auto& { return c.eval_start_date; })},
      {"demand_mode",
       {[](C& c, const std::string& k, std::string_view v) {
          if (v == "synthetic") c.demand_mode = DemandMode::Synthetic;
          else if (v == "records") c.demand_mode = DemandMode::Records;
          else throw ConfigError(k, "expected synthetic or records");
        },
        [](const C& c) { return std::string(c.demand_mode == DemandMode::Synthetic ? "synthetic" : "records"); }}},
      {"train_records", string_field([](auto& c) -> auto& { return c.train_records; })},
      {"eval_records", string_field([](auto& c) -> auto& { return c.eval_records; })},
      {"hourly_profile",
       {[](C& c, const std::string& k, std::string_view v) {
          c.hourly_profile.clear();
          for (const auto& item : split(v, ',')) c.hourly_profile.push_back(to_double(k, item));
        },
        [](const C& c) { return join<double>(c.hourly_profile, ',', fmt_double); }}},
      {"clusters",
       {[](C& c, const std::string& k, std::string_view v) {
          // x:y:sigma:weight;...  or "uniform"
          c.clusters.clear();
          if (v == "uniform") return;
          for (const auto& item : split(v, ';')) {
            auto parts = split(item, ':');
            if (parts.size() != 4) throw ConfigError(k, "expected x:y:sigma:weight entries or 'uniform'");
            c.clusters.push_back({{to_double(k, parts[0]), to_double(k, parts[1])},
                                  to_double(k, parts[2]),
                                  to_double(k, parts[3])});
          }
        },
        [](const C& c) {
          if (c.clusters.empty()) return std::string("uniform");
          return join<GaussianCluster>(c.clusters, ';', [](const GaussianCluster& g) {
            return fmt_double(g.center.x) + ":" + fmt_double(g.center.y) + ":" + fmt_double(g.sigma) + ":" +
                   fmt_double(g.weight);
          });
        }}},
      {"jitter_minutes", double_field([](auto& c) -> auto& { return c.jitter_minutes; })},
      {"tolerance_shape", double_field([](auto& c) -> auto& { return c.stochastic.tolerance_shape; })},
      {"tolerance_scale", double_field([](auto& c) -> auto& { return c.stochastic.tolerance_scale; })},
      {"reject_alpha", double_field([](auto& c) -> auto& { return c.stochastic.reject_alpha; })},
      {"reject_beta", double_field([](auto& c) -> auto& { return c.stochastic.reject_beta; })},
      {"gamma", double_field([](auto& c) -> auto& { return c.agent.gamma; })},
      {"reward_bonus", double_field([](auto& c) -> auto& { return c.agent.reward_bonus; })},
      {"epsilon_max", double_field([](auto& c) -> auto& { return c.agent.epsilon_max; })},
      {"epsilon_min", double_field([](auto& c) -> auto& { return c.agent.epsilon_min; })},
      {"epsilon_factor", double_field([](auto& c) -> auto& { return c.agent.epsilon_factor; })},
      {"learning_starts", uint_field([](auto& c) -> auto& { return c.agent.learning_starts; })},
      {"update_steps", uint_field([](auto& c) -> auto& { return c.agent.update_steps; })},
      {"batch_size", uint_field([](auto& c) -> auto& { return c.agent.batch_size; })},
      {"buffer_capacity", uint_field([](auto& c) -> auto& { return c.agent.buffer_capacity; })},
      {"learning_rate", double_field([](auto& c) -> auto& { return c.agent.learning_rate; })},
      {"leaky_slope", double_field([](auto& c) -> auto& { return c.agent.leaky_slope; })},
      {"adam_beta1", double_field([](auto& c) -> auto& { return c.agent.adam_beta1; })},
      {"adam_beta2", double_field([](auto& c) -> auto& { return c.agent.adam_beta2; })},
      {"adam_epsilon", double_field([](auto& c) -> auto& { return c.agent.adam_epsilon; })},
      {"hidden",
       {[](C& c, const std::string& k, std::string_view v) {
          c.agent.hidden.clear();
          for (const auto& item : split(v, ',')) c.agent.hidden.push_back(to_uint(k, item));
        },
        [](const C& c) {
          return join<std::size_t>(c.agent.hidden, ',', [](const std::size_t& h) { return std::to_string(h); });
        }}},
      {"speed", double_field([](auto& c) -> auto& { return c.speed; })},
      {"box_x_min", double_field([](auto& c) -> auto& { return c.box.x_min; })},
      {"box_x_max", double_field([](auto& c) -> auto& { return c.box.x_max; })},
      {"box_y_min", double_field([](auto& c) -> auto& { return c.box.y_min; })},
      {"box_y_max", double_field([](auto& c) -> auto& { return c.box.y_max; })},
      {"hold_minutes", double_field([](auto& c) -> auto& { return c.hold_minutes; })},
      {"event_ceiling", uint_field([](auto& c) -> auto& { return c.event_ceiling; })},
      {"threads", uint_field([](auto& c) -> auto& { return c.threads; })},
      {"out_dir", string_field([](auto& c) -> auto& { return c.out_dir; })},
      {"checkpoint_dir", string_field([](auto& c) -> auto& { return c.checkpoint_dir; })},
      {"trace",
       {[](C& c, const std::string& k, std::string_view v) { c.trace = to_bool(k, v); },
        [](const C& c) { return std::string(c.trace ? "true" : "false"); }}},
  };
  return kFields;
}

const Field* find_field(std::string_view key) {
  for (const auto& [k, f] : fields()) {
    if (k == key) return &f;
  }
  return nullptr;
}

}  // namespace

std::string add_days(std::string_view date, int days) {
  const std::chrono::sys_days d = std::chrono::sys_days{parse_date(date)} + std::chrono::days{days};
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

int day_of_week(std::string_view date) {
  const std::chrono::weekday wd{std::chrono::sys_days{parse_date(date)}};
  return static_cast<int>((wd.c_encoding() + 6) % 7);
}

void ExperimentConfig::validate() const {
  auto positive = [](std::uint64_t v, const char* key) {
    if (v == 0) throw ConfigError(key, "must be positive");
  };
  positive(daily_calls, "daily_calls");
  positive(eval_daily_calls, "eval_daily_calls");
  positive(training_days, "training_days");
  positive(repetitions, "repetitions");
  positive(eval_days, "eval_days");
  positive(eval_seeds, "eval_seeds");
  positive(event_ceiling, "event_ceiling");
  if (scenarios.empty()) throw ConfigError("scenarios", "must name at least one scenario");
  for (const auto& s : scenarios) scenario_by_name(s);
  if (policies.empty()) throw ConfigError("policies", "must name at least one policy");
  for (const auto& p : policies) {
    if (p != "dqn" && !is_baseline_policy(p)) throw ConfigError("policies", "unknown policy '" + p + "'");
  }
  try {
    parse_date(train_start_date);
  } catch (const ConfigError& e) {
    throw ConfigError("train_start_date", e.what());
  }
  try {
    parse_date(eval_start_date);
  } catch (const ConfigError& e) {
    throw ConfigError("eval_start_date", e.what());
  }
  if (demand_mode == DemandMode::Records) {
    if (train_records.empty()) throw ConfigError("train_records", "required in records mode");
    if (eval_records.empty()) throw ConfigError("eval_records", "required in records mode");
    if (std::filesystem::path(train_records).lexically_normal() ==
        std::filesystem::path(eval_records).lexically_normal()) {
      throw ConfigError("eval_records", "must differ from train_records");
    }
    if (!std::filesystem::exists(train_records)) throw ConfigError("train_records", "file not found");
    if (!std::filesystem::exists(eval_records)) throw ConfigError("eval_records", "file not found");
  } else {
    if (hourly_profile.size() != 24 && hourly_profile.size() != kHoursPerWeek) {
      throw ConfigError("hourly_profile", "expected 24 or 168 values");
    }
    for (double w : hourly_profile) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("hourly_profile", "weights must be nonnegative");
    }
    if (std::all_of(hourly_profile.begin(), hourly_profile.end(), [](double w) { return w == 0.0; })) {
      throw ConfigError("hourly_profile", "at least one weight must be positive");
    }
    SpatialModel{clusters}.validate();
  }
  if (!(jitter_minutes >= 0.0)) throw ConfigError("jitter_minutes", "must be nonnegative");
  stochastic.validate();
  agent.validate();
  if (!(speed > 0.0) || !std::isfinite(speed)) throw ConfigError("speed", "must be positive");
  if (!box.valid()) throw ConfigError("box_x_min", "bounding box must have positive extent");
  if (!(hold_minutes > 0.0)) throw ConfigError("hold_minutes", "must be positive");
  if (out_dir.empty()) throw ConfigError("out_dir", "must not be empty");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const Field* field = find_field(key);
    if (!field) throw ConfigError(key, "unknown key");
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");
    field->parse(cfg, key, value);
  }
  if (!seen.contains("seed")) throw ConfigError("seed", "missing required key");
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  for (const auto& [key, field] : fields()) out << key << '=' << field.format(cfg) << '\n';
  return out.str();
}

}  // namespace dispatch

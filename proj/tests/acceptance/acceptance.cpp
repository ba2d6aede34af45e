// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dispatch/baselines.hpp"
#include "dispatch/config.hpp"
#include "dispatch/dqn_agent.hpp"
#include "dispatch/experiment.hpp"
#include "dispatch/reward.hpp"
#include "dispatch/simulation.hpp"
#include "support/net_oracles.hpp"

namespace fs = std::filesystem;
using namespace dispatch;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Abstains at every epoch.
class IdlePolicy final : public DispatchPolicy {
 public:
  std::string_view name() const noexcept override { return "idle"; }
  std::optional<VehicleId> choose_vehicle(const NewCallEpoch&) override { return std::nullopt; }
  std::optional<CallId> choose_call(const FreeVehicleEpoch&) override { return std::nullopt; }
};

// 1. Conservation and lifecycle over randomized days.
Outcome conservation(std::uint64_t seed) {
  const auto start = Clock::now();
  Rng setup(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> fleet_size(0, 25);
  std::uniform_int_distribution<int> cap(1, 600);
  const char* policies[] = {"fifo", "lifo", "nn", "random", "dqn"};
  ExperimentConfig base;
  rl::AgentConfig agent_cfg;
  std::size_t violations = 0, calls = 0;
  std::string first;
  for (int day = 0; day < 1000; ++day) {
    const std::uint64_t day_seed = setup();
    StreamFactory streams(day_seed);
    Rng demand_rng = streams.stream("demand"), tolerance = streams.stream("tolerance"),
        placement = streams.stream("placement"), rejection = streams.stream("rejection"),
        driver = streams.stream("driver");

    StochasticConfig stochastic{0.5 + 3 * unit(setup), 1 + 8 * unit(setup), 0.5 + 2 * unit(setup),
                                0.5 + 10 * unit(setup)};
    std::vector<double> profile(24);
    for (auto& w : profile) w = unit(setup);
    const std::size_t daily = static_cast<std::size_t>(cap(setup));
    SpatialModel spatial;
    if (unit(setup) < 0.5) spatial.clusters = base.clusters;
    const auto demand = DemandSource::synthetic(hourly_rates(profile, daily + 1), spatial);
    const int dow = day % 7;

    SimulationOptions o;
    o.speed = 0.01 + 0.3 * unit(setup);
    o.hold_minutes = 1 + 9 * unit(setup);
    o.week_origin_offset = dow * kMinutesPerDay;
    o.audit = true;
    Simulation sim(o, make_fleet(static_cast<std::size_t>(fleet_size(setup)), stochastic, placement, rejection));
    sim.add_calls(generate_daily_calls(demand, dow, daily, demand_rng), stochastic, tolerance);

    const std::string name = policies[day % 5];
    std::unique_ptr<DispatchPolicy> policy;
    std::optional<rl::DqnAgent> nc, fv;
    if (name == "dqn") {
      Rng init = streams.stream("agent-init");
      nc.emplace("new_call", agent_cfg, init);
      fv.emplace("free_vehicle", agent_cfg, init);
      policy = std::make_unique<rl::DqnPolicy>(*nc, *fv, streams.stream("exploration"));
    } else {
      policy = make_baseline_policy(name, streams.stream("policy"));
    }
    try {
      const DayMetrics m = sim.run(*policy, *policy, driver);
      bool ok = m.conserved() && m.calls_created == sim.calls().size();
      for (const auto& h : sim.status_histories()) ok = ok && is_valid_status_path(h);
      calls += m.calls_created;
      if (!ok) {
        ++violations;
        if (first.empty()) first = format("day %d (%s)", day, name.c_str());
      }
    } catch (const SimulationError& e) {
      ++violations;
      if (first.empty()) first = format("day %d (%s): %s", day, name.c_str(), e.what());
    }
  }
  const double secs = seconds_since(start);
  Outcome out;
  out.pass = violations == 0 && secs < 120.0;
  out.detail = format("1000 days, %zu calls, %zu violations, %.1f s", calls, violations, secs);
  if (!first.empty()) out.detail += "; first: " + first;
  return out;
}

// 2. Baseline choices against brute force.
Outcome baseline_oracles(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> size(1, 100);
  std::uniform_int_distribution<int> coarse(0, 10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t mismatches = 0;
  FifoPolicy fifo;
  LifoPolicy lifo;
  NearestNeighborPolicy nn;
  for (int snap = 0; snap < 10000; ++snap) {
    const int n = size(rng);
    std::vector<Call> calls(static_cast<std::size_t>(n));
    std::vector<Vehicle> fleet(static_cast<std::size_t>(n));
    // Shuffled ids make tie-breaks by id differ from tie-breaks by position.
    std::vector<std::uint32_t> ids(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ids[i] = static_cast<std::uint32_t>(i);
    std::shuffle(ids.begin(), ids.end(), rng);
    for (int i = 0; i < n; ++i) {
      calls[i].id = ids[i];
      calls[i].created_at = coarse(rng);
      calls[i].origin = {coarse(rng) / 10.0, coarse(rng) / 10.0};
      fleet[i].id = ids[i];
      fleet[i].location = {coarse(rng) / 10.0, coarse(rng) / 10.0};
      fleet[i].busy = unit(rng) < 0.4;
    }
    std::vector<const Call*> waiting;
    for (const auto& c : calls) waiting.push_back(&c);
    const Coordinate anchor{unit(rng), unit(rng)};

    // Oracle: sort a copy of (key, id) pairs and take the first.
    auto oracle = [](std::vector<std::pair<double, std::uint32_t>> keyed) -> std::optional<std::uint32_t> {
      if (keyed.empty()) return std::nullopt;
      std::sort(keyed.begin(), keyed.end());
      return keyed.front().second;
    };
    std::vector<std::pair<double, std::uint32_t>> oldest, newest, closest_call, closest_idle;
    for (const auto& c : calls) {
      oldest.push_back({c.created_at, c.id});
      newest.push_back({-c.created_at, c.id});
      closest_call.push_back({std::abs(c.origin.x - anchor.x) + std::abs(c.origin.y - anchor.y), c.id});
    }
    for (const auto& v : fleet) {
      if (!v.busy) closest_idle.push_back({std::abs(v.location.x - anchor.x) + std::abs(v.location.y - anchor.y), v.id});
    }
    const EpochContext ctx;
    Call probe;
    probe.origin = anchor;
    Vehicle at_anchor;
    at_anchor.location = anchor;
    const NewCallEpoch new_call{ctx, probe, fleet};
    const FreeVehicleEpoch free_vehicle{ctx, at_anchor, waiting};
    mismatches += fifo.choose_call(free_vehicle) != oracle(oldest);
    mismatches += lifo.choose_call(free_vehicle) != oracle(newest);
    mismatches += nn.choose_call(free_vehicle) != oracle(closest_call);
    mismatches += nn.choose_vehicle(new_call) != oracle(closest_idle);
    mismatches += fifo.choose_vehicle(new_call) != oracle(closest_idle);
  }
  return {mismatches == 0, format("10000 snapshots, %zu mismatches", mismatches)};
}

// 3. Closed-form discounted reward against the explicit sum.
Outcome reward_closed_form() {
  double worst_rel = 0.0, worst_discount = 0.0;
  for (double gamma : {0.5, 0.9, 0.99}) {
    const double beta = discount_rate(gamma);
    const double r = 7.25;
    long double sum = 0.0L, power = 1.0L;
    for (int tau = 1; tau <= 10000; ++tau) {
      sum += power;
      power *= gamma;
      const double expected = static_cast<double>(static_cast<long double>(r) * sum / tau);
      const double got = discounted_reward(r, gamma, tau);
      worst_rel = std::max(worst_rel, std::abs(got - expected) / std::abs(expected));
      worst_discount = std::max(worst_discount, std::abs(discount_factor(beta, tau) - std::pow(gamma, tau)));
    }
  }
  return {worst_rel <= 1e-9 && worst_discount <= 1e-12,
          format("max relative error %.3g, max |exp(-beta tau) - gamma^tau| %.3g", worst_rel, worst_discount)};
}

// 4. Backprop against central differences.
Outcome gradient_check(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int net_index = 0; net_index < 20; ++net_index) {
    rl::Mlp<double> net({5, 4, 3, 1}, 0.01);
    net.init_uniform(rng);
    for (auto& b : net.params()) b += 0.1 * u(rng);
    std::vector<std::vector<double>> inputs(16, std::vector<double>(5));
    std::vector<rl::RegressionSample<double>> batch;
    for (auto& x : inputs) {
      for (auto& v : x) v = u(rng);
      batch.push_back({x, 2.0 * u(rng)});
    }
    worst = std::max(worst, testing::check_gradient(net, batch, 1e-4, 1e-12).max_relative_error);
  }
  return {worst <= 1e-5, format("20 nets, max relative error %.3g", worst)};
}

// 5. Toy SMDP: states s0, s1; action a moves deterministically.
struct ToyStep {
  double reward;
  double sojourn;
  int next;
};
constexpr ToyStep kToy[2][2] = {
    {{0.5, 1.0, 0}, {0.0, 2.0, 1}},
    {{2.0, 1.0, 1}, {0.5, 1.0, 0}},
};

FeatureVector toy_features(int s, int a) {
  FeatureVector f{};
  f[static_cast<std::size_t>(2 * s + a)] = 1.0f;
  return f;
}

Outcome toy_smdp(std::uint64_t seed) {
  const auto start = Clock::now();
  const double gamma = 0.9;
  // Oracle: value iteration on exact SMDP Bellman operator.
  double q[2][2] = {};
  for (int it = 0; it < 5000; ++it) {
    double next[2][2];
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        const auto& t = kToy[s][a];
        next[s][a] = t.reward + std::pow(gamma, t.sojourn) * std::max(q[t.next][0], q[t.next][1]);
      }
    }
    std::copy(&next[0][0], &next[0][0] + 4, &q[0][0]);
  }

  rl::AgentConfig cfg;
  cfg.gamma = gamma;
  cfg.epsilon_max = 1.0;
  cfg.epsilon_min = 1.0;
  cfg.epsilon_factor = 1.0;
  cfg.learning_starts = 1000;
  cfg.update_steps = 500;
  Rng rng(seed);
  rl::DqnAgent agent("toy", cfg, rng);
  int s = 0;
  double clock = 0.0;
  const int steps = 50000;
  for (int k = 0; k < steps; ++k) {
    const std::array<FeatureVector, 2> cands{toy_features(s, 0), toy_features(s, 1)};
    agent.begin_epoch(clock, cands);
    const int a = static_cast<int>(*agent.act(cands, rng));
    const auto& t = kToy[s][a];
    agent.open_transition(cands[a], t.reward, clock);
    agent.train_step(rng);
    clock += t.sojourn;
    s = t.next;
  }

  bool policy_ok = true;
  double worst = 0.0;
  std::string values;
  for (int st = 0; st < 2; ++st) {
    const double q0 = agent.q_value(toy_features(st, 0)), q1 = agent.q_value(toy_features(st, 1));
    policy_ok = policy_ok && ((q0 >= q1) == (q[st][0] >= q[st][1]));
    worst = std::max({worst, std::abs(q0 - q[st][0]) / std::abs(q[st][0]), std::abs(q1 - q[st][1]) / std::abs(q[st][1])});
    values += format(" Q(s%d)=(%.2f,%.2f) vs (%.2f,%.2f)", st, q0, q1, q[st][0], q[st][1]);
  }
  const double secs = seconds_since(start);
  return {policy_ok && worst <= 0.05 && secs < 60.0,
          format("%d steps, policy %s, max relative q error %.3f, %.1f s;", steps, policy_ok ? "matches" : "differs",
                 worst, secs) +
              values};
}

double mean_metric(const Report& r, const char* policy, const char* scenario, const char* metric) {
  const auto* row = r.find(policy, scenario, metric);
  return row ? row->mean : std::nan("");
}

ExperimentConfig desk_config(const fs::path& dir, const std::string& scenario) {
  ExperimentConfig cfg;
  cfg.seed = 1;
  cfg.daily_calls = 1000;
  cfg.eval_daily_calls = 1000;
  cfg.training_days = 40;
  cfg.repetitions = 1;
  cfg.scenarios = {scenario};
  cfg.eval_days = 10;
  cfg.eval_seeds = 5;
  cfg.policies = {"fifo", "lifo", "nn", "random", "dqn"};
  cfg.out_dir = dir.string();
  return cfg;
}

std::string policy_table(const Report& r, const std::string& scenario) {
  std::string out;
  for (const char* p : {"dqn", "fifo", "lifo", "nn", "random"}) {
    out += format(" %s %.3f/%.3f", p, mean_metric(r, p, scenario.c_str(), "avg_delay_min"),
                  mean_metric(r, p, scenario.c_str(), "cancel_rate"));
  }
  return out;
}

EvaluationResult train_and_evaluate(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  write_training_outputs(cfg, run_training(cfg));
  auto result = run_evaluation(cfg);
  write_evaluation_outputs(cfg, result);
  return result;
}

// 6. Hard scenario: DQN against Random and LIFO.
Outcome hard_direction(const fs::path& dir) {
  const auto start = Clock::now();
  const auto cfg = desk_config(dir, "hard");
  const auto result = train_and_evaluate(cfg);
  const double dqn = mean_metric(result.report, "dqn", "hard", "avg_delay_min");
  const double lifo = mean_metric(result.report, "lifo", "hard", "avg_delay_min");
  const double random = mean_metric(result.report, "random", "hard", "avg_delay_min");
  const double dqn_cancel = mean_metric(result.report, "dqn", "hard", "cancel_rate");
  const double random_cancel = mean_metric(result.report, "random", "hard", "cancel_rate");
  const double secs = seconds_since(start);
  return {dqn <= random && dqn <= lifo && dqn_cancel <= random_cancel && secs < 900.0,
          format("delay/cancel:%s; %.1f s", policy_table(result.report, "hard").c_str(), secs)};
}

// 7. Very easy scenario: every policy within 15% of the best delay.
Outcome very_easy_parity(const fs::path& dir) {
  const auto start = Clock::now();
  auto cfg = desk_config(dir, "very_easy");
  cfg.eval_seeds = 2;
  const auto result = train_and_evaluate(cfg);
  double best = INFINITY, worst = 0.0;
  for (const char* p : {"dqn", "fifo", "lifo", "nn", "random"}) {
    const double d = mean_metric(result.report, p, "very_easy", "avg_delay_min");
    best = std::min(best, d);
    worst = std::max(worst, d);
  }
  const double secs = seconds_since(start);
  return {worst <= 1.15 * best && secs < 600.0,
          format("worst/best delay %.3f; delay/cancel:%s; %.1f s", worst / best,
                 policy_table(result.report, "very_easy").c_str(), secs)};
}

// 8. Unassigned calls cancel exactly at creation plus tolerance.
Outcome cancellation_exactness(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 12);
  const StochasticConfig stochastic;
  std::size_t checked = 0, wrong = 0;
  for (int c = 0; c < 1000; ++c) {
    SimulationOptions o;
    o.speed = 0.02 + 0.2 * unit(rng);
    std::vector<Vehicle> fleet;
    const int n_vehicles = static_cast<int>(4 * unit(rng));
    for (int v = 0; v < n_vehicles; ++v) {
      Vehicle veh;
      veh.id = static_cast<VehicleId>(v);
      veh.location = veh.move_destination = {unit(rng), unit(rng)};
      veh.reject_prob = unit(rng);
      fleet.push_back(veh);
    }
    Simulation sim(o, fleet);
    const int n = count(rng);
    std::vector<double> times(static_cast<std::size_t>(n));
    for (auto& t : times) t = 1400.0 * unit(rng);
    std::sort(times.begin(), times.end());
    for (double t : times) sim.add_call({t, {unit(rng), unit(rng)}, {unit(rng), unit(rng)}}, sample_tolerance(stochastic, rng));

    std::unique_ptr<DispatchPolicy> policy;
    if (c % 2) policy = std::make_unique<IdlePolicy>();
    else policy = std::make_unique<NearestNeighborPolicy>();
    Rng driver(rng());
    std::vector<std::optional<double>> canceled_at(static_cast<std::size_t>(n));
    while (sim.step(*policy, *policy, driver)) {
      for (CallId id = 0; id < static_cast<CallId>(n); ++id) {
        if (!canceled_at[id] && sim.call(id).status == CallStatus::Canceled) canceled_at[id] = sim.clock();
      }
    }
    for (CallId id = 0; id < static_cast<CallId>(n); ++id) {
      const Call& call = sim.call(id);
      if (call.assigned_at) continue;
      const double due = call.created_at + call.max_wait;
      if (due >= kMinutesPerDay) continue;
      ++checked;
      if (!canceled_at[id] || *canceled_at[id] != due) ++wrong;
    }
  }
  return {wrong == 0 && checked >= 1000,
          format("%zu never-assigned calls checked over 1000 days, %zu not canceled exactly at t + w", checked, wrong)};
}

// 9. Two evaluations with identical config give byte-identical reports.
Outcome evaluation_determinism(const fs::path& dir, const fs::path& checkpoints) {
  ExperimentConfig cfg;
  cfg.seed = 7;
  cfg.eval_daily_calls = 1000;
  cfg.eval_days = 3;
  cfg.eval_seeds = 2;
  cfg.scenarios = {"easy", "hard"};
  cfg.checkpoint_dir = checkpoints.string();
  cfg.threads = 0;
  cfg.out_dir = (dir / "a").string();
  write_evaluation_outputs(cfg, run_evaluation(cfg));
  cfg.out_dir = (dir / "b").string();
  cfg.threads = 1;
  write_evaluation_outputs(cfg, run_evaluation(cfg));
  const auto a = slurp(dir / "a" / "report.csv"), b = slurp(dir / "b" / "report.csv");
  const bool per_day_same = slurp(dir / "a" / "per_day.csv") == slurp(dir / "b" / "per_day.csv");
  return {!a.empty() && a == b && per_day_same,
          format("report.csv %zu bytes, identical: %s; per_day.csv identical: %s", a.size(), a == b ? "yes" : "no",
                 per_day_same ? "yes" : "no")};
}

// 10. 100,000 calls and 1,000 vehicles under nearest neighbor.
Outcome throughput() {
  ExperimentConfig cfg;
  cfg.eval_daily_calls = 100000;
  const auto demand = DemandSource::synthetic(hourly_rates(cfg.hourly_profile, 105000), SpatialModel{cfg.clusters});
  DayRun run{"2022-02-01", "custom", 100000, 1000, StreamFactory(3).derive("throughput")};
  NearestNeighborPolicy nn;
  const auto start = Clock::now();
  const auto m = simulate_day(cfg, demand, run, nn);
  const double secs = seconds_since(start);
  return {m.calls_created == 100000 && m.conserved() && secs < 60.0,
          format("%llu calls, %llu served, %.2f s", static_cast<unsigned long long>(m.calls_created),
                 static_cast<unsigned long long>(m.calls_served), secs)};
}

// 11. Checkpoint save, load, save.
Outcome checkpoint_round_trip(const fs::path& dir, std::uint64_t seed) {
  Rng rng(seed);
  rl::AgentConfig cfg;
  rl::DqnAgent agent("new_call", cfg, rng);
  std::uniform_real_distribution<float> u(-1e-2f, 1e-2f);
  for (auto& p : agent.online().params()) p += u(rng);
  const auto first = dir / "first.ckpt", second = dir / "second.ckpt";
  rl::save_checkpoint(first.string(), agent.online(), agent.name());
  const auto loaded = rl::load_checkpoint(first.string(), static_cast<float>(cfg.leaky_slope));
  rl::save_checkpoint(second.string(), loaded.net, loaded.agent_name);
  const bool bytes_same = slurp(first) == slurp(second);
  std::size_t differing = 0;
  std::uniform_real_distribution<float> x(-2.0f, 2.0f);
  for (int i = 0; i < 100; ++i) {
    FeatureVector probe;
    for (auto& v : probe) v = x(rng);
    differing += agent.online().forward(probe) != loaded.net.forward(probe);
  }
  return {bytes_same && differing == 0 && loaded.agent_name == "new_call",
          format("files identical: %s; %zu of 100 probe outputs differ", bytes_same ? "yes" : "no", differing)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dispatch acceptance suite"};
  std::string work_dir = "acceptance_work";
  std::vector<int> only;
  app.add_option("--work-dir", work_dir, "scratch directory for experiment outputs");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const fs::path root(work_dir);
  fs::remove_all(root);
  fs::create_directories(root);

  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "conservation and lifecycle over 1000 random days", [] { return conservation(1001); }},
      {2, "FIFO/LIFO/NN equal brute-force oracles", [] { return baseline_oracles(1002); }},
      {3, "discounted reward closed form", [] { return reward_closed_form(); }},
      {4, "backprop gradient check", [] { return gradient_check(1004); }},
      {5, "double DQN on toy SMDP", [] { return toy_smdp(1005); }},
      {6, "hard scenario: DQN beats Random and LIFO", [&] { return hard_direction(root / "hard"); }},
      {7, "very easy scenario: all policies within 15%", [&] { return very_easy_parity(root / "very_easy"); }},
      {8, "cancellation at exactly t + w", [] { return cancellation_exactness(1008); }},
      {9, "evaluate twice gives identical reports",
       [&] {
         // Uses the hard-scenario checkpoints when available, otherwise trains a small pair.
         fs::path ckpt = root / "hard";
         if (!fs::exists(ExperimentConfig{.checkpoint_dir = ckpt.string()}.checkpoint_path(rl::kNewCallAgent))) {
           ExperimentConfig small;
           small.training_days = 1;
           small.repetitions = 1;
           small.daily_calls = 300;
           small.out_dir = (root / "small").string();
           write_training_outputs(small, run_training(small));
           ckpt = root / "small";
         }
         return evaluation_determinism(root / "determinism", ckpt);
       }},
      {10, "100k calls, 1000 vehicles, NN under 60 s", [] { return throughput(); }},
      {11, "checkpoint round trip", [&] { return checkpoint_round_trip(root, 1011); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

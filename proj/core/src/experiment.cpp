#include "dispatch/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <thread>

#include "dispatch/baselines.hpp"
#include "dispatch/errors.hpp"

namespace dispatch {

std::array<double, kHoursPerWeek> hourly_rates(const std::vector<double>& profile, std::size_t daily_calls) {
  if (profile.size() != 24 && profile.size() != kHoursPerWeek) {
    throw ConfigError("hourly_profile", "expected 24 or 168 values");
  }
  std::array<double, kHoursPerWeek> rates{};
  for (int day = 0; day < 7; ++day) {
    const std::size_t base = profile.size() == 24 ? 0 : static_cast<std::size_t>(day) * 24;
    const double total = std::accumulate(profile.begin() + base, profile.begin() + base + 24, 0.0);
    if (total <= 0.0) continue;
    for (int h = 0; h < 24; ++h) {
      rates[day * 24 + h] = profile[base + h] / total * static_cast<double>(daily_calls);
    }
  }
  return rates;
}

DemandSource make_demand_source(const ExperimentConfig& cfg, bool evaluation, std::size_t daily_calls) {
  if (cfg.demand_mode == DemandMode::Records) {
    const auto& path = evaluation ? cfg.eval_records : cfg.train_records;
    auto loaded = load_trip_records(std::filesystem::path(path), cfg.box);
    return DemandSource::from_records(std::move(loaded.records), cfg.jitter_minutes);
  }
  return DemandSource::synthetic(hourly_rates(cfg.hourly_profile, daily_calls), SpatialModel{cfg.clusters});
}

DayMetrics simulate_day(const ExperimentConfig& cfg, const DemandSource& demand, const DayRun& run,
                        DispatchPolicy& policy, std::ostream* trace) {
  const StreamFactory streams(run.seed);
  Rng demand_rng = streams.stream("demand");
  Rng tolerance_rng = streams.stream("tolerance");
  Rng placement_rng = streams.stream("placement");
  Rng reject_prob_rng = streams.stream("rejection");
  Rng driver_rng = streams.stream("driver");

  const int dow = day_of_week(run.date);
  const auto calls = generate_daily_calls(demand, dow, run.daily_calls, demand_rng);

  SimulationOptions options;
  options.speed = cfg.speed;
  options.hold_minutes = cfg.hold_minutes;
  options.week_origin_offset = static_cast<double>(dow) * kMinutesPerDay;
  options.event_ceiling = cfg.event_ceiling;
  options.trace = trace;

  Simulation sim(options, make_fleet(run.fleet_size, cfg.stochastic, placement_rng, reject_prob_rng));
  sim.add_calls(calls, cfg.stochastic, tolerance_rng);
  DayMetrics m = sim.run(policy, policy, driver_rng);
  m.seed = run.seed;
  return m;
}

std::vector<TrainingRun> training_schedule(const ExperimentConfig& cfg) {
  std::vector<TrainingRun> runs;
  runs.reserve(cfg.training_days * cfg.scenarios.size() * cfg.repetitions);
  for (std::size_t d = 0; d < cfg.training_days; ++d) {
    for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
      for (std::size_t r = 0; r < cfg.repetitions; ++r) runs.push_back({d, s, r});
    }
  }
  return runs;
}

namespace {

rl::DqnAgent make_agent(const ExperimentConfig& cfg, std::string_view name, std::uint64_t index) {
  Rng init = StreamFactory(cfg.seed).stream("agent-init", {index});
  return rl::DqnAgent(std::string(name), cfg.agent, init);
}

void write_day_records(const std::filesystem::path& path, std::span<const DayRecord> rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  write_per_day_csv(out, rows);
}

}  // namespace

TrainingResult run_training(const ExperimentConfig& cfg, const TrainingProgress& progress) {
  cfg.validate();
  const DemandSource demand = make_demand_source(cfg, false, cfg.daily_calls);
  TrainingResult result{make_agent(cfg, rl::kNewCallAgent, 0), make_agent(cfg, rl::kFreeVehicleAgent, 1), {}};
  const StreamFactory master(cfg.seed);
  const auto schedule = training_schedule(cfg);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const TrainingRun& tr = schedule[i];
    const Scenario& scenario = scenario_by_name(cfg.scenarios[tr.scenario_index]);
    DayRun run;
    run.date = add_days(cfg.train_start_date, static_cast<int>(tr.day));
    run.scenario = scenario.name;
    run.daily_calls = cfg.daily_calls;
    run.fleet_size = scenario.fleet_size(cfg.daily_calls);
    run.seed = master.derive("train-run", {tr.day, tr.scenario_index, tr.repetition});

    rl::DqnPolicy policy(result.new_call, result.free_vehicle, master.stream("exploration", {i}));
    const DayMetrics m = simulate_day(cfg, demand, run, policy);
    result.days.push_back(DayRecord::from_metrics(run.date, run.scenario, m));
    if (progress) progress(tr, result.days.back());
  }
  return result;
}

void write_learning_curves(std::ostream& out, const TrainingResult& result) {
  out << "agent,series,block,mean\n";
  char buf[40];
  for (const rl::DqnAgent* agent : {&result.new_call, &result.free_vehicle}) {
    const auto& c = agent->curves();
    const std::pair<const char*, const rl::BlockAverager*> series[] = {
        {"reward", &c.reward}, {"q_value", &c.q_value}, {"loss", &c.loss}};
    for (const auto& [label, avg] : series) {
      const auto& means = avg->means();
      for (std::size_t b = 0; b < means.size(); ++b) {
        std::snprintf(buf, sizeof buf, "%.9g", means[b]);
        out << agent->name() << ',' << label << ',' << b << ',' << buf << '\n';
      }
    }
  }
}

void write_training_outputs(const ExperimentConfig& cfg, const TrainingResult& result) {
  const std::filesystem::path out_dir(cfg.out_dir);
  std::filesystem::create_directories(out_dir);
  const auto ckpt_new = cfg.checkpoint_path(rl::kNewCallAgent);
  std::filesystem::create_directories(ckpt_new.parent_path());
  rl::save_checkpoint(ckpt_new.string(), result.new_call.online(), rl::kNewCallAgent);
  rl::save_checkpoint(cfg.checkpoint_path(rl::kFreeVehicleAgent).string(), result.free_vehicle.online(),
                      rl::kFreeVehicleAgent);
  std::ofstream curves(out_dir / "learning_curves.csv", std::ios::binary | std::ios::trunc);
  if (!curves) throw Error("cannot write learning curves");
  write_learning_curves(curves, result);
  write_day_records(out_dir / "training_days.csv", result.days);
}

EvaluationResult run_evaluation(const ExperimentConfig& cfg) {
  const bool needs_dqn = std::find(cfg.policies.begin(), cfg.policies.end(), "dqn") != cfg.policies.end();
  if (!needs_dqn) return run_evaluation(cfg, nullptr, nullptr);

  const float slope = static_cast<float>(cfg.agent.leaky_slope);
  auto load = [&](std::string_view agent) {
    const auto path = cfg.checkpoint_path(agent);
    if (!std::filesystem::exists(path)) {
      throw Error("missing checkpoint for agent '" + std::string(agent) + "' at " + path.string());
    }
    auto ckpt = rl::load_checkpoint(path.string(), slope);
    if (ckpt.agent_name != agent) {
      throw Error("checkpoint " + path.string() + " belongs to agent '" + ckpt.agent_name + "'");
    }
    return std::move(ckpt.net);
  };
  const rl::Mlp<float> new_call = load(rl::kNewCallAgent);
  const rl::Mlp<float> free_vehicle = load(rl::kFreeVehicleAgent);
  return run_evaluation(cfg, &new_call, &free_vehicle);
}

EvaluationResult run_evaluation(const ExperimentConfig& cfg, const rl::Mlp<float>* new_call,
                                const rl::Mlp<float>* free_vehicle) {
  cfg.validate();
  const DemandSource demand = make_demand_source(cfg, true, cfg.eval_daily_calls);
  const StreamFactory master(cfg.seed);

  struct Job {
    std::string policy;
    DayRun run;
  };
  std::vector<Job> jobs;
  for (const auto& policy : cfg.policies) {
    if (policy == "dqn" && (!new_call || !free_vehicle)) throw Error("dqn evaluation needs both agent networks");
    for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
      const Scenario& scenario = scenario_by_name(cfg.scenarios[s]);
      for (std::size_t d = 0; d < cfg.eval_days; ++d) {
        for (std::size_t r = 0; r < cfg.eval_seeds; ++r) {
          DayRun run;
          run.date = add_days(cfg.eval_start_date, static_cast<int>(d));
          run.scenario = scenario.name;
          run.daily_calls = cfg.eval_daily_calls;
          run.fleet_size = scenario.fleet_size(cfg.eval_daily_calls);
          run.seed = master.derive("eval-run", {s, d, r});
          jobs.push_back({policy, std::move(run)});
        }
      }
    }
  }

  std::vector<std::optional<DayRecord>> records(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      try {
        std::unique_ptr<DispatchPolicy> policy;
        if (job.policy == "dqn") {
          policy = std::make_unique<rl::DqnPolicy>(*new_call, *free_vehicle);
        } else {
          policy = make_baseline_policy(job.policy, StreamFactory(job.run.seed).stream("policy"));
        }
        const DayMetrics m = simulate_day(cfg, demand, job.run, *policy);
        records[i] = DayRecord::from_metrics(job.run.date, job.run.scenario, m);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };

  std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  EvaluationResult result;
  result.days.reserve(records.size());
  for (auto& r : records) result.days.push_back(std::move(*r));
  result.report = aggregate(result.days);
  return result;
}

void write_evaluation_outputs(const ExperimentConfig& cfg, const EvaluationResult& result) {
  const std::filesystem::path out_dir(cfg.out_dir);
  std::filesystem::create_directories(out_dir);
  write_day_records(out_dir / "per_day.csv", result.days);
  emit_report(result.report, ReportFormat::Csv, out_dir / "report.csv");
  emit_report(result.report, ReportFormat::Text, out_dir / "report.txt");
}

}  // namespace dispatch

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dispatch/baselines.hpp"
#include "dispatch/config.hpp"
#include "dispatch/errors.hpp"
#include "dispatch/experiment.hpp"
#include "dispatch/report.hpp"

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

dispatch::ExperimentConfig load_config(const GlobalOptions& g) {
  dispatch::ExperimentConfig cfg;
  if (!g.config_path.empty()) cfg = dispatch::parse_config_file(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  cfg.validate();
  return cfg;
}

void print_metrics(const dispatch::DayMetrics& m) {
  std::printf("policy=%s\n", m.new_call_policy.c_str());
  std::printf("calls_created=%llu\n", static_cast<unsigned long long>(m.calls_created));
  std::printf("calls_served=%llu\n", static_cast<unsigned long long>(m.calls_served));
  std::printf("calls_canceled=%llu\n", static_cast<unsigned long long>(m.calls_canceled));
  std::printf("calls_pending=%llu\n", static_cast<unsigned long long>(m.calls_pending));
  std::printf("average_delay_min=%.6f\n", m.average_delay());
  std::printf("cancel_rate=%.6f\n", m.cancel_rate());
  std::printf("total_service_min=%.6f\n", m.sum_service_time);
  std::printf("seed=%llu\n", static_cast<unsigned long long>(m.seed));
}

struct SimulateOptions {
  std::string policy = "nn";
  std::string scenario;
  std::size_t day = 0;
  std::size_t replicate = 0;
  std::string trace_path;
};

int run_simulate(const GlobalOptions& g, const SimulateOptions& o) {
  const auto cfg = load_config(g);
  const std::string scenario_name = o.scenario.empty() ? cfg.scenarios.front() : o.scenario;
  const auto& scenario = dispatch::scenario_by_name(scenario_name);

  // Same seed derivation as the evaluation runner, so a simulated day matches
  // the corresponding per-day row.
  std::size_t scenario_index = 0;
  while (scenario_index < cfg.scenarios.size() && cfg.scenarios[scenario_index] != scenario.name) ++scenario_index;
  dispatch::DayRun run;
  run.date = dispatch::add_days(cfg.eval_start_date, static_cast<int>(o.day));
  run.scenario = scenario.name;
  run.daily_calls = cfg.eval_daily_calls;
  run.fleet_size = scenario.fleet_size(cfg.eval_daily_calls);
  run.seed = dispatch::StreamFactory(cfg.seed).derive("eval-run", {scenario_index, o.day, o.replicate});

  std::unique_ptr<dispatch::DispatchPolicy> policy;
  std::optional<dispatch::rl::Mlp<float>> new_call, free_vehicle;
  if (o.policy == "dqn") {
    const float slope = static_cast<float>(cfg.agent.leaky_slope);
    new_call = dispatch::rl::load_checkpoint(cfg.checkpoint_path(dispatch::rl::kNewCallAgent).string(), slope).net;
    free_vehicle =
        dispatch::rl::load_checkpoint(cfg.checkpoint_path(dispatch::rl::kFreeVehicleAgent).string(), slope).net;
    policy = std::make_unique<dispatch::rl::DqnPolicy>(*new_call, *free_vehicle);
  } else {
    policy = dispatch::make_baseline_policy(o.policy, dispatch::StreamFactory(run.seed).stream("policy"));
  }

  const auto demand = dispatch::make_demand_source(cfg, true, cfg.eval_daily_calls);
  std::ofstream trace;
  if (!o.trace_path.empty()) {
    trace.open(o.trace_path, std::ios::binary | std::ios::trunc);
    if (!trace) throw dispatch::Error("cannot write trace " + o.trace_path);
  }
  const auto m = dispatch::simulate_day(cfg, demand, run, *policy, trace.is_open() ? &trace : nullptr);
  std::printf("date=%s\nscenario=%s\nfleet=%zu\n", run.date.c_str(), run.scenario.c_str(), run.fleet_size);
  print_metrics(m);
  return 0;
}

int run_train(const GlobalOptions& g, bool quiet) {
  const auto cfg = load_config(g);
  dispatch::TrainingProgress progress;
  if (!quiet) {
    progress = [&](const dispatch::TrainingRun& r, const dispatch::DayRecord& d) {
      std::fprintf(stderr, "train day %zu rep %zu %-9s served %llu/%llu avg_delay %.3f\n", r.day, r.repetition,
                   d.scenario.c_str(), static_cast<unsigned long long>(d.served),
                   static_cast<unsigned long long>(d.created), d.avg_delay_min);
    };
  }
  const auto result = dispatch::run_training(cfg, progress);
  dispatch::write_training_outputs(cfg, result);
  std::printf("trained %zu days; checkpoints in %s\n", result.days.size(),
              cfg.checkpoint_path(dispatch::rl::kNewCallAgent).parent_path().string().c_str());
  return 0;
}

int run_evaluate(const GlobalOptions& g) {
  const auto cfg = load_config(g);
  const auto result = dispatch::run_evaluation(cfg);
  dispatch::write_evaluation_outputs(cfg, result);
  dispatch::write_report(std::cout, result.report, dispatch::ReportFormat::Text);
  return 0;
}

struct ReportOptions {
  std::string per_day;
  std::string format = "text";
  std::string output;
};

int run_report(const GlobalOptions& g, const ReportOptions& o) {
  std::string per_day = o.per_day;
  if (per_day.empty()) {
    const std::string dir = g.out_dir.empty() ? load_config(g).out_dir : g.out_dir;
    per_day = (std::filesystem::path(dir) / "per_day.csv").string();
  }
  std::ifstream in(per_day, std::ios::binary);
  if (!in) throw dispatch::Error("cannot read " + per_day);
  const auto report = dispatch::aggregate(dispatch::read_per_day_csv(in));
  const auto format = o.format == "csv" ? dispatch::ReportFormat::Csv : dispatch::ReportFormat::Text;
  if (o.output.empty()) {
    if (report.rows.empty()) throw dispatch::Error("report is empty");
    dispatch::write_report(std::cout, report, format);
  } else {
    dispatch::emit_report(report, format, o.output);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ride-hailing dispatch simulator and DQN harness"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed (overrides the config)");
  app.add_option("--out-dir", g.out_dir, "output directory (overrides the config)");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "run one evaluation day under one policy");
  simulate->add_option("--policy", sim.policy, "fifo, lifo, nn, random or dqn")
      ->check(CLI::IsMember({"fifo", "lifo", "nn", "random", "dqn"}));
  simulate->add_option("--scenario", sim.scenario, "very_easy, easy, medium or hard");
  simulate->add_option("--day", sim.day, "evaluation day index");
  simulate->add_option("--replicate", sim.replicate, "evaluation seed replicate");
  simulate->add_option("--trace", sim.trace_path, "write the event trace to this file");

  bool quiet = false;
  auto* train = app.add_subcommand("train", "train both agents and write checkpoints");
  train->add_flag("--quiet", quiet, "suppress per-day progress");

  auto* evaluate = app.add_subcommand("evaluate", "evaluate policies and write per-day and report files");

  ReportOptions rep;
  auto* report = app.add_subcommand("report", "aggregate a per-day CSV into a report");
  report->add_option("--per-day", rep.per_day, "per-day CSV (default: <out-dir>/per_day.csv)");
  report->add_option("--format", rep.format, "csv or text")->check(CLI::IsMember({"csv", "text"}));
  report->add_option("--output", rep.output, "output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return run_simulate(g, sim);
    if (*train) return run_train(g, quiet);
    if (*evaluate) return run_evaluate(g);
    if (*report) return run_report(g, rep);
  } catch (const dispatch::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

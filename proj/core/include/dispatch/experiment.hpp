#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dispatch/config.hpp"
#include "dispatch/demand.hpp"
#include "dispatch/dqn_agent.hpp"
#include "dispatch/report.hpp"
#include "dispatch/simulation.hpp"

namespace dispatch {

// Hourly call rates scaled so each day's expected volume is `daily_calls`.
std::array<double, kHoursPerWeek> hourly_rates(const std::vector<double>& profile, std::size_t daily_calls);

// Training and evaluation use disjoint demand: separate record files, or
// synthetic streams seeded under different names.
DemandSource make_demand_source(const ExperimentConfig& cfg, bool evaluation, std::size_t daily_calls);

struct DayRun {
  std::string date;
  std::string scenario;
  std::size_t daily_calls = 0;
  std::size_t fleet_size = 0;
  // Every random draw of the day derives from this seed, so policies run on
  // the same DayRun face identical demand, tolerances and drivers.
  std::uint64_t seed = 0;
};

DayMetrics simulate_day(const ExperimentConfig& cfg, const DemandSource& demand, const DayRun& run,
                        DispatchPolicy& policy, std::ostream* trace = nullptr);

struct TrainingRun {
  std::size_t day = 0;
  std::size_t scenario_index = 0;
  std::size_t repetition = 0;
};

// Days outermost, then scenarios, then repetitions.
std::vector<TrainingRun> training_schedule(const ExperimentConfig& cfg);

struct TrainingResult {
  rl::DqnAgent new_call;
  rl::DqnAgent free_vehicle;
  std::vector<DayRecord> days;
};

using TrainingProgress = std::function<void(const TrainingRun&, const DayRecord&)>;

// Throws EmptyDemandError before any training when the demand is empty.
TrainingResult run_training(const ExperimentConfig& cfg, const TrainingProgress& progress = {});
// Checkpoints, learning_curves.csv and training_days.csv.
void write_training_outputs(const ExperimentConfig& cfg, const TrainingResult& result);
void write_learning_curves(std::ostream& out, const TrainingResult& result);

struct EvaluationResult {
  std::vector<DayRecord> days;
  Report report;
};

// Loads the checkpoints when `dqn` is among the policies.
EvaluationResult run_evaluation(const ExperimentConfig& cfg);
EvaluationResult run_evaluation(const ExperimentConfig& cfg, const rl::Mlp<float>* new_call,
                                const rl::Mlp<float>* free_vehicle);
// per_day.csv, report.csv and report.txt under out_dir.
void write_evaluation_outputs(const ExperimentConfig& cfg, const EvaluationResult& result);

}  // namespace dispatch

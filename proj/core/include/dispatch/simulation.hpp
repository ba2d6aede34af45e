#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dispatch/demand.hpp"
#include "dispatch/entities.hpp"
#include "dispatch/event_queue.hpp"
#include "dispatch/policy.hpp"
#include "dispatch/rng.hpp"

namespace dispatch {

struct SimulationOptions {
  double speed = 0.04;  // box units per minute
  Minutes hold_minutes = 5.0;
  Minutes demand_window = 15.0;
  Minutes day_length = kMinutesPerDay;
  // Minute of the week at which the simulated day starts.
  Minutes week_origin_offset = 0.0;
  std::uint64_t event_ceiling = 100'000'000;
  // Full-state checks after every event plus per-call status histories.
  bool audit = false;
  // One `time,kind,ids` line per processed event, in processing order.
  std::ostream* trace = nullptr;
};

struct DayMetrics {
  std::uint64_t calls_created = 0;
  std::uint64_t calls_served = 0;
  std::uint64_t calls_canceled = 0;
  std::uint64_t calls_pending = 0;
  Minutes sum_delay = 0.0;
  Minutes sum_service_time = 0.0;
  std::string new_call_policy;
  std::string free_vehicle_policy;
  std::uint64_t seed = 0;

  // Zero when no call was served.
  Minutes average_delay() const noexcept {
    return calls_served ? sum_delay / static_cast<double>(calls_served) : 0.0;
  }
  double cancel_rate() const noexcept {
    return calls_created ? static_cast<double>(calls_canceled) / static_cast<double>(calls_created) : 0.0;
  }
  bool conserved() const noexcept {
    return calls_created == calls_served + calls_canceled + calls_pending;
  }
  friend bool operator==(const DayMetrics&, const DayMetrics&) = default;
};

struct ProposalResult {
  ProposalOutcome outcome = ProposalOutcome::Accepted;
  Minutes pickup_eta = 0.0;
  Minutes drive_time = 0.0;
};

// Places `n` vehicles uniformly in the unit square and draws each driver's
// rejection probability once.
std::vector<Vehicle> make_fleet(std::size_t n, const StochasticConfig& cfg, Rng& placement,
                                Rng& rejection);

// One simulated day of the dispatch environment. Decision epochs are the
// NewCall and FreeVehicle events; every other event only advances state.
class Simulation {
 public:
  Simulation(SimulationOptions options, std::vector<Vehicle> fleet);

  // Registers future arrivals (nondecreasing times). Tolerances are drawn
  // from `cfg` unless given explicitly. Returns the id of the first call.
  CallId add_calls(std::span<const CallPrototype> calls, const StochasticConfig& cfg, Rng& tolerance_rng);
  CallId add_call(const CallPrototype& call, Minutes max_wait);

  // Processes events with time < day_length, then closes the day.
  DayMetrics run(DispatchPolicy& new_call_policy, DispatchPolicy& free_vehicle_policy, Rng& driver_rng);

  // Processes the next event if it lies inside the day. Returns false when
  // nothing was processed.
  bool step(DispatchPolicy& new_call_policy, DispatchPolicy& free_vehicle_policy, Rng& driver_rng);
  // Counts pending calls, signals day end to the policies, and returns metrics.
  DayMetrics finish(DispatchPolicy& new_call_policy, DispatchPolicy& free_vehicle_policy);

  void push_event(SimEvent e) { events_.push(e); }

  void handle_new_call(CallId call, DispatchPolicy& policy, Rng& driver_rng);
  void handle_free_vehicle(VehicleId vehicle, DispatchPolicy& policy, Rng& driver_rng);
  ProposalResult propose_assignment(VehicleId vehicle, CallId call, Rng& driver_rng);
  void fire_cancellation(CallId call);
  void arrive_at_origin(VehicleId vehicle, CallId call);
  void complete_trip(VehicleId vehicle, CallId call);

  EpochContext context() const noexcept;

  SimTime clock() const noexcept { return clock_; }
  const SimulationOptions& options() const noexcept { return options_; }
  std::span<const Vehicle> fleet() const noexcept { return fleet_; }
  std::span<const Call> calls() const noexcept { return calls_; }
  const Call& call(CallId id) const { return calls_.at(id); }
  const Vehicle& vehicle(VehicleId id) const { return fleet_.at(id); }
  bool arrived(CallId id) const { return arrived_.at(id); }
  const std::set<CallId>& waiting_pool() const noexcept { return waiting_; }
  const DayMetrics& metrics() const noexcept { return metrics_; }
  std::uint64_t events_processed() const noexcept { return events_processed_; }
  const EventQueue& events() const noexcept { return events_; }
  // Recorded only in audit mode.
  std::span<const std::vector<CallStatus>> status_histories() const noexcept { return histories_; }
  // Throws SimulationError describing the first violated invariant.
  void audit_state() const;

 private:
  void set_status(Call& c, CallStatus s);
  void start_hold(Vehicle& v);
  void note_arrival(SimTime t);
  void dispatch_event(const SimEvent& e, DispatchPolicy& ncp, DispatchPolicy& fvp, Rng& rng);
  void trace(const SimEvent& e) const;
  void notify(DispatchPolicy& policy, EpochKind kind, std::optional<ProposalResult> r);

  SimulationOptions options_;
  std::vector<Vehicle> fleet_;
  std::vector<Call> calls_;
  std::vector<char> arrived_;
  std::set<CallId> waiting_;
  EventQueue events_;
  SimTime clock_ = 0.0;
  std::deque<SimTime> recent_arrivals_;
  DayMetrics metrics_;
  std::uint64_t events_processed_ = 0;
  std::vector<std::vector<CallStatus>> histories_;
  std::vector<const Call*> snapshot_;
  bool finished_ = false;
};

}  // namespace dispatch

#include "dispatch/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "dispatch/errors.hpp"
#include "dispatch/geometry.hpp"

namespace dispatch {

std::vector<Vehicle> make_fleet(std::size_t n, const StochasticConfig& cfg, Rng& placement,
                                Rng& rejection) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vehicle> fleet(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vehicle& v = fleet[i];
    v.id = static_cast<VehicleId>(i);
    v.location = {unit(placement), unit(placement)};
    v.move_destination = v.location;
    v.reject_prob = sample_rejection_prob(cfg, rejection);
  }
  return fleet;
}

Simulation::Simulation(SimulationOptions options, std::vector<Vehicle> fleet)
    : options_(options), fleet_(std::move(fleet)) {
  travel_time(1.0, options_.speed);  // validates speed
  if (!(options_.hold_minutes > 0.0)) throw ConfigError("hold_minutes", "must be positive");
  if (!(options_.day_length > 0.0)) throw ConfigError("day_length", "must be positive");
  for (std::size_t i = 0; i < fleet_.size(); ++i) {
    Vehicle& v = fleet_[i];
    if (v.id != i) throw SimulationError("vehicle ids must equal their fleet index");
    if (v.reject_prob < 0.0 || v.reject_prob > 1.0) throw SimulationError("reject_prob outside [0,1]");
    v.busy = false;
    v.move_destination = v.location;
    v.free_at = 0.0;
    v.reposition_hold_until.reset();
  }
}

CallId Simulation::add_call(const CallPrototype& proto, Minutes max_wait) {
  if (!(max_wait > 0.0)) throw SimulationError("max_wait must be positive");
  if (!calls_.empty() && proto.arrival < calls_.back().created_at) {
    throw SimulationError("calls must be added in nondecreasing arrival order");
  }
  Call c;
  c.id = static_cast<CallId>(calls_.size());
  c.created_at = proto.arrival;
  c.origin = proto.origin;
  c.destination = proto.destination;
  c.max_wait = max_wait;
  calls_.push_back(c);
  arrived_.push_back(0);
  if (options_.audit) histories_.emplace_back();
  events_.push({.time = proto.arrival, .kind = EventKind::NewCall, .call = c.id});
  return c.id;
}

CallId Simulation::add_calls(std::span<const CallPrototype> calls, const StochasticConfig& cfg,
                             Rng& tolerance_rng) {
  const auto first = static_cast<CallId>(calls_.size());
  calls_.reserve(calls_.size() + calls.size());
  for (const auto& p : calls) add_call(p, sample_tolerance(cfg, tolerance_rng));
  return first;
}

EpochContext Simulation::context() const noexcept {
  EpochContext ctx;
  ctx.clock = clock_;
  ctx.speed = options_.speed;
  ctx.minute_of_week = minute_of_week(clock_, options_.week_origin_offset);
  ctx.resource_demand_ratio =
      recent_arrivals_.empty() ? 1.0
                               : static_cast<double>(fleet_.size()) / static_cast<double>(recent_arrivals_.size());
  return ctx;
}

void Simulation::note_arrival(SimTime t) {
  recent_arrivals_.push_back(t);
}

void Simulation::set_status(Call& c, CallStatus s) {
  c.status = s;
  if (options_.audit) histories_[c.id].push_back(s);
}

void Simulation::start_hold(Vehicle& v) {
  v.reposition_hold_until = clock_ + options_.hold_minutes;
  events_.push({.time = *v.reposition_hold_until, .kind = EventKind::RepositionTimeout, .vehicle = v.id});
}

void Simulation::notify(DispatchPolicy& policy, EpochKind kind, std::optional<ProposalResult> r) {
  DecisionOutcome out;
  out.epoch = kind;
  out.clock = clock_;
  if (r) {
    out.proposal = r->outcome;
    out.pickup_eta = r->pickup_eta;
    out.drive_time = r->drive_time;
  }
  policy.on_outcome(out);
}

ProposalResult Simulation::propose_assignment(VehicleId vid, CallId cid, Rng& driver_rng) {
  Vehicle& v = fleet_.at(vid);
  Call& c = calls_.at(cid);
  if (v.busy) throw SimulationError("proposal to busy vehicle " + std::to_string(vid));
  if (c.status != CallStatus::Waiting) throw SimulationError("proposal for non-waiting call " + std::to_string(cid));

  ProposalResult r;
  r.pickup_eta = travel_time(manhattan_distance(v.location, c.origin), options_.speed);
  r.drive_time = travel_time(manhattan_distance(c.origin, c.destination), options_.speed);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(driver_rng) < v.reject_prob) {
    r.outcome = ProposalOutcome::DriverRejected;
    return r;
  }
  // Total wait from creation to projected pickup, the same clock the
  // cancellation timer runs on.
  if (clock_ + r.pickup_eta - c.created_at > c.max_wait) {
    r.outcome = ProposalOutcome::CustomerRejected;
    return r;
  }

  r.outcome = ProposalOutcome::Accepted;
  set_status(c, CallStatus::Assigned);
  c.assigned_vehicle = vid;
  c.assigned_at = clock_;
  waiting_.erase(cid);
  v.busy = true;
  v.move_destination = c.destination;
  v.free_at = clock_ + r.pickup_eta + r.drive_time;
  v.reposition_hold_until.reset();
  events_.push({.time = clock_ + r.pickup_eta, .kind = EventKind::ArrivalAtOrigin, .vehicle = vid, .call = cid});
  return r;
}

void Simulation::handle_new_call(CallId cid, DispatchPolicy& policy, Rng& driver_rng) {
  Call& c = calls_.at(cid);
  arrived_[cid] = 1;
  ++metrics_.calls_created;
  if (options_.audit) histories_[cid].push_back(CallStatus::Waiting);
  note_arrival(clock_);
  events_.push({.time = c.created_at + c.max_wait, .kind = EventKind::Cancellation, .call = cid});
  waiting_.insert(cid);

  NewCallEpoch epoch{context(), c, fleet_};
  const auto choice = policy.choose_vehicle(epoch);
  if (!choice) return;
  if (*choice >= fleet_.size()) {
    throw SimulationError(std::string(policy.name()) + " chose unknown vehicle " + std::to_string(*choice));
  }
  Vehicle& v = fleet_[*choice];
  if (v.busy) {
    notify(policy, EpochKind::NewCall, std::nullopt);
    return;
  }
  const auto r = propose_assignment(v.id, cid, driver_rng);
  notify(policy, EpochKind::NewCall, r);
  if (r.outcome != ProposalOutcome::Accepted) start_hold(v);
}

void Simulation::handle_free_vehicle(VehicleId vid, DispatchPolicy& policy, Rng& driver_rng) {
  Vehicle& v = fleet_.at(vid);
  if (v.busy || waiting_.empty()) return;

  snapshot_.clear();
  for (CallId id : waiting_) snapshot_.push_back(&calls_[id]);
  FreeVehicleEpoch epoch{context(), v, snapshot_};
  const auto choice = policy.choose_call(epoch);
  if (!choice) return;
  if (!waiting_.contains(*choice)) {
    throw SimulationError(std::string(policy.name()) + " chose call " + std::to_string(*choice) +
                          " outside the waiting pool");
  }
  const auto r = propose_assignment(vid, *choice, driver_rng);
  notify(policy, EpochKind::FreeVehicle, r);
  if (r.outcome != ProposalOutcome::Accepted) start_hold(v);
}

void Simulation::fire_cancellation(CallId cid) {
  Call& c = calls_.at(cid);
  if (!arrived_[cid] || c.status != CallStatus::Waiting) return;
  set_status(c, CallStatus::Canceled);
  waiting_.erase(cid);
  ++metrics_.calls_canceled;
}

void Simulation::arrive_at_origin(VehicleId vid, CallId cid) {
  Vehicle& v = fleet_.at(vid);
  Call& c = calls_.at(cid);
  set_status(c, CallStatus::PickedUp);
  c.pickup_time = clock_;
  v.location = c.origin;
  const Minutes drive = travel_time(manhattan_distance(c.origin, c.destination), options_.speed);
  events_.push({.time = clock_ + drive, .kind = EventKind::ArrivalAtDestination, .vehicle = vid, .call = cid});
}

void Simulation::complete_trip(VehicleId vid, CallId cid) {
  Vehicle& v = fleet_.at(vid);
  Call& c = calls_.at(cid);
  set_status(c, CallStatus::Completed);
  c.completion_time = clock_;
  v.location = c.destination;
  v.move_destination = v.location;
  v.busy = false;
  v.free_at = clock_;
  ++metrics_.calls_served;
  metrics_.sum_delay += *c.pickup_time - c.created_at;
  metrics_.sum_service_time += clock_ - *c.pickup_time;
  events_.push({.time = clock_, .kind = EventKind::FreeVehicle, .vehicle = vid});
}

void Simulation::trace(const SimEvent& e) const {
  char ids[48];
  switch (e.kind) {
    case EventKind::NewCall:
    case EventKind::Cancellation:
      std::snprintf(ids, sizeof ids, "c%u", e.call);
      break;
    case EventKind::FreeVehicle:
    case EventKind::RepositionTimeout:
      std::snprintf(ids, sizeof ids, "v%u", e.vehicle);
      break;
    case EventKind::ArrivalAtOrigin:
    case EventKind::ArrivalAtDestination:
      std::snprintf(ids, sizeof ids, "v%u c%u", e.vehicle, e.call);
      break;
  }
  char time[32];
  std::snprintf(time, sizeof time, "%.6f", e.time);
  *options_.trace << time << ',' << to_string(e.kind) << ',' << ids << '\n';
}

void Simulation::dispatch_event(const SimEvent& e, DispatchPolicy& ncp, DispatchPolicy& fvp, Rng& rng) {
  switch (e.kind) {
    case EventKind::NewCall:
      handle_new_call(e.call, ncp, rng);
      break;
    case EventKind::FreeVehicle:
      handle_free_vehicle(e.vehicle, fvp, rng);
      break;
    case EventKind::Cancellation:
      fire_cancellation(e.call);
      break;
    case EventKind::ArrivalAtOrigin:
      arrive_at_origin(e.vehicle, e.call);
      break;
    case EventKind::ArrivalAtDestination:
      complete_trip(e.vehicle, e.call);
      break;
    case EventKind::RepositionTimeout: {
      Vehicle& v = fleet_.at(e.vehicle);
      // Superseded holds and vehicles that found work meanwhile are ignored.
      if (v.busy || !v.reposition_hold_until || *v.reposition_hold_until != e.time) break;
      v.reposition_hold_until.reset();
      handle_free_vehicle(v.id, fvp, rng);
      break;
    }
  }
}

bool Simulation::step(DispatchPolicy& ncp, DispatchPolicy& fvp, Rng& driver_rng) {
  const SimEvent* next = events_.peek();
  if (!next || next->time >= options_.day_length) return false;
  if (events_processed_ >= options_.event_ceiling) {
    throw SimulationError("event ceiling of " + std::to_string(options_.event_ceiling) +
                          " exceeded at t=" + std::to_string(clock_) + " (" +
                          std::to_string(events_.size()) + " events queued, " +
                          std::to_string(waiting_.size()) + " calls waiting)");
  }
  const SimEvent e = *events_.pop();
  clock_ = e.time;
  while (!recent_arrivals_.empty() && recent_arrivals_.front() <= clock_ - options_.demand_window) {
    recent_arrivals_.pop_front();
  }
  ++events_processed_;
  if (options_.trace) trace(e);
  dispatch_event(e, ncp, fvp, driver_rng);
  if (options_.audit) audit_state();
  return true;
}

DayMetrics Simulation::finish(DispatchPolicy& ncp, DispatchPolicy& fvp) {
  if (finished_) return metrics_;
  finished_ = true;
  clock_ = std::max(clock_, options_.day_length);
  metrics_.calls_pending = 0;
  for (std::size_t i = 0; i < calls_.size(); ++i) {
    if (!arrived_[i]) continue;
    const auto s = calls_[i].status;
    if (s != CallStatus::Completed && s != CallStatus::Canceled) ++metrics_.calls_pending;
  }
  metrics_.new_call_policy = std::string(ncp.name());
  metrics_.free_vehicle_policy = std::string(fvp.name());
  ncp.on_day_end(clock_);
  if (&fvp != &ncp) fvp.on_day_end(clock_);
  return metrics_;
}

DayMetrics Simulation::run(DispatchPolicy& ncp, DispatchPolicy& fvp, Rng& driver_rng) {
  while (step(ncp, fvp, driver_rng)) {
  }
  return finish(ncp, fvp);
}

void Simulation::audit_state() const {
  auto fail = [this](const std::string& what) {
    throw SimulationError("audit failed at t=" + std::to_string(clock_) + ": " + what);
  };
  std::size_t waiting_count = 0;
  for (std::size_t i = 0; i < calls_.size(); ++i) {
    const Call& c = calls_[i];
    const bool in_pool = waiting_.contains(c.id);
    const bool should = arrived_[i] && c.status == CallStatus::Waiting;
    if (in_pool != should) fail("pool membership mismatch for call " + std::to_string(i));
    waiting_count += should;
    if (c.pickup_time && *c.pickup_time < c.created_at) fail("pickup before creation");
    if (!histories_.empty() && arrived_[i] && !is_valid_status_path(histories_[i])) {
      fail("invalid status history for call " + std::to_string(i));
    }
  }
  if (waiting_count != waiting_.size()) fail("pool size mismatch");
  for (const Vehicle& v : fleet_) {
    if (!v.busy && (v.move_destination != v.location || v.time_to_free(clock_) != 0.0)) {
      fail("idle vehicle " + std::to_string(v.id) + " has a pending movement");
    }
  }
}

}  // namespace dispatch

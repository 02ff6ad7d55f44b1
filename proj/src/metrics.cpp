#include "v2xmac/metrics.hpp"

#include <fmt/format.h>

#include <cmath>

#include "v2xmac/error.hpp"

namespace v2xmac {

double reselection_probability(const Cv2xSolution& sol, const Cv2xParams& params) {
  const double cycle = 1.0 / sol.at(1, 0);
  const int gamma = params.selection_window;
  if (!(cycle > gamma - 1)) {
    fail(ErrorCode::ModelValidity,
         fmt::format("cycle time 1/pi(1,0) = {} does not exceed Gamma - 1 = {}", cycle, gamma - 1));
  }
  double stay = 1.0;
  for (int i = 0; i < gamma; ++i) stay *= 1.0 - 1.0 / (cycle - i);
  return 1.0 - stay;
}

double collision_prob_cv2x(const Cv2xSolution& sol, const Cv2xParams& params, int vehicles) {
  if (vehicles < 1) fail(ErrorCode::InvalidParameter, fmt::format("N = {} < 1", vehicles));
  const int total = params.total_csrs();
  if (vehicles > total) {
    fail(ErrorCode::ResourceExhaustion, fmt::format("N = {} exceeds the {} CSRs of one selection window", vehicles, total));
  }
  if (vehicles == 1) return 0.0;
  const double p = reselection_probability(sol, params);
  const double per_pair = p * (1.0 - params.keep_probability) / (total - vehicles + 1);
  return -std::expm1((vehicles - 1) * std::log1p(-per_pair));
}

double collision_prob_dot11p(const Dot11pSolution& sol, int vehicles) {
  if (vehicles < 1) fail(ErrorCode::InvalidParameter, fmt::format("N = {} < 1", vehicles));
  const double x = sol.access_probability();
  if (!(x > 0.0)) fail(ErrorCode::NoTransmitter, "access probability is 0");
  const double lone = (1.0 - sol.theta) * (sol.sensing.at(0) + sol.aifs.back()) + sol.transmit_probability;
  const double others_silent = std::pow(1.0 - x, vehicles - 1);
  const double anyone = -std::expm1(vehicles * std::log1p(-std::min(x, 1.0)));
  if (!(anyone > 0.0)) fail(ErrorCode::NoTransmitter, "no vehicle accesses the channel");
  return 1.0 - vehicles * lone * others_silent / anyone;
}

double avg_delay_cv2x(const QueueSolution& queue, double tx_opportunity) {
  if (!(queue.empty < 1.0)) fail(ErrorCode::EmptySystem, "the queue is always empty; no packet delay to average");
  if (!(tx_opportunity > 0.0)) fail(ErrorCode::InvalidParameter, "P_txo must be positive");
  double sum = 0.0;
  for (int i = 1; i <= queue.capacity(); ++i) sum += (2.0 * i - 1.0) / (2.0 * tx_opportunity) * queue.probs[i];
  return sum / (1.0 - queue.empty);
}

Dot11pDelay avg_delay_dot11p(const Dot11pSolution& sol, const DelayTable& delays, const Dot11pParams& params) {
  double aifs_mass = 0.0;
  for (double p : sol.aifs) aifs_mass += p;
  const double conditional = 1.0 - (sol.idle + sol.transmit_probability + aifs_mass);
  if (!(conditional > 0.0)) {
    fail(ErrorCode::DegenerateConditional, fmt::format("conditioning mass {} is not positive", conditional));
  }

  Dot11pDelay out;
  out.slot_time_us = params.slot_time_us;
  out.fixed_part = params.tx_slots + 1.0;
  for (int i = 1; i < params.aifs_slots(); ++i) out.fixed_part += std::pow(1.0 - sol.theta, i);

  double weighted = 0.0;
  for (size_t k = 0; k < sol.busy.size(); ++k) weighted += delays.busy[k] * sol.busy[k];
  for (size_t s = 0; s < sol.stages.size(); ++s) {
    for (size_t j = 0; j < sol.deferral[s].size(); ++j) weighted += delays.deferral[s][j] * sol.deferral[s][j];
    for (size_t j = 0; j < sol.backoff_aifs[s].size(); ++j) {
      weighted += delays.backoff_aifs[s][j] * sol.backoff_aifs[s][j];
    }
    weighted += delays.sensing[s] * sol.sensing[s];
  }
  out.residual_part = weighted / conditional;
  out.slots = out.fixed_part + out.residual_part;
  return out;
}

double channel_utilization(Tech tech, double transmit, int vehicles, double collision, const Cv2xParams& cv2x) {
  const double users = transmit * vehicles * (1.0 - collision);
  return tech == Tech::Cv2x ? users / cv2x.csrs_per_subframe : users;
}

MetricsReport evaluate(Tech tech, const ScenarioConfig& config, const CouplingOptions& options) {
  ScenarioConfig scenario = config;
  if (tech == Tech::Cv2x) resolve_rc_bounds(scenario);
  MetricsReport r;
  r.tech = tech;
  r.vehicles = scenario.vehicles;
  r.fixed_point = solve_coupled(tech, scenario, options);
  const CouplingState& s = r.fixed_point.state;

  TrafficParams traffic = scenario.traffic;
  traffic.cam_interval = r.fixed_point.cam_interval;
  const QueueSolution queue = solve_queue(queue_transitions(traffic, s.transmit), traffic.queue_capacity);
  r.queue_empty = queue.empty;

  if (tech == Tech::Cv2x) {
    const auto sol = solve_cv2x(scenario.cv2x, queue.empty, queue.nonempty(), queue.transitions.arrival_when_empty);
    r.transmit = sol.transmit_probability;
    r.tx_opportunity = sol.tx_opportunity;
    r.total_csrs = scenario.cv2x.total_csrs();
    r.collision = collision_prob_cv2x(sol, scenario.cv2x, scenario.vehicles);
    r.delay_ms = avg_delay_cv2x(queue, sol.tx_opportunity);
  } else {
    const auto sol = solve_dot11p(scenario.dot11p, queue.empty, queue.transitions.arrival_when_empty, s.channel_busy);
    r.transmit = sol.transmit_probability;
    r.theta = s.channel_busy;
    r.collision = collision_prob_dot11p(sol, scenario.vehicles);
    try {
      const auto d = avg_delay_dot11p(sol, state_delays(scenario.dot11p, s.channel_busy), scenario.dot11p);
      r.delay_slots = d.slots;
      r.delay_ms = d.milliseconds();
    } catch (const ModelError& e) {
      if (e.code() != ErrorCode::DegenerateConditional) throw;
      r.delay_defined = false;
    }
  }
  r.utilization = channel_utilization(tech, r.transmit, scenario.vehicles, r.collision, scenario.cv2x);
  return r;
}

}  // namespace v2xmac

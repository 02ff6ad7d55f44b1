#include "v2xmac/coupling.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "v2xmac/cv2x.hpp"
#include "v2xmac/dot11p.hpp"
#include "v2xmac/traffic.hpp"

namespace v2xmac {

CouplingState coupling_sweep(Tech tech, const ScenarioConfig& scenario, const CouplingState& current,
                             int cam_interval) {
  TrafficParams traffic = scenario.traffic;
  traffic.cam_interval = cam_interval;
  const QueueSolution queue = solve_queue(queue_transitions(traffic, current.transmit), traffic.queue_capacity);

  CouplingState next;
  next.queue_empty = queue.empty;
  next.queue_nonempty = 1.0 - queue.empty;
  next.arrival_when_empty = queue.transitions.arrival_when_empty;
  if (tech == Tech::Cv2x) {
    const auto sol = solve_cv2x(scenario.cv2x, next.queue_empty, next.queue_nonempty, next.arrival_when_empty);
    next.transmit = sol.transmit_probability;
    next.channel_busy = 0.0;
  } else {
    const auto sol = solve_dot11p(scenario.dot11p, next.queue_empty, next.arrival_when_empty, current.channel_busy);
    next.transmit = sol.transmit_probability;
    next.channel_busy = update_theta(next.transmit, scenario.vehicles);
  }
  return next;
}

double coupling_distance(const CouplingState& a, const CouplingState& b) {
  return std::max({std::abs(a.transmit - b.transmit), std::abs(a.queue_empty - b.queue_empty),
                   std::abs(a.arrival_when_empty - b.arrival_when_empty), std::abs(a.channel_busy - b.channel_busy)});
}

namespace {

FixedPointReport iterate(Tech tech, const ScenarioConfig& scenario, const CouplingOptions& options, int cam_interval) {
  FixedPointReport report;
  report.cam_interval = cam_interval;
  CouplingState state = options.initial;
  state.queue_nonempty = 1.0 - state.queue_empty;
  if (tech == Tech::Cv2x) state.channel_busy = 0.0;

  const double keep = 1.0 - options.damping;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const CouplingState next = coupling_sweep(tech, scenario, state, cam_interval);
    const double residual = coupling_distance(state, next);
    report.residual_trace.push_back(residual);

    state.transmit = keep * state.transmit + options.damping * next.transmit;
    state.queue_empty = keep * state.queue_empty + options.damping * next.queue_empty;
    state.queue_nonempty = 1.0 - state.queue_empty;
    state.arrival_when_empty = keep * state.arrival_when_empty + options.damping * next.arrival_when_empty;
    state.channel_busy = keep * state.channel_busy + options.damping * next.channel_busy;

    report.iterations = it;
    report.residual = residual;
    if (!std::isfinite(residual)) break;
    if (residual <= options.tolerance) {
      report.converged = true;
      break;
    }
  }
  report.state = state;
  if (!report.converged) {
    throw NoFixedPointError(fmt::format("{} coupling stalled at residual {} after {} iterations (T_C = {})",
                                        to_string(tech), report.residual, report.iterations, cam_interval),
                            std::move(report));
  }
  return report;
}

// Load seen by the congestion-control policy. C-V2X has no carrier sense in
// the model, so its busy ratio is the expected share of occupied CSRs.
double congestion_level(Tech tech, const ScenarioConfig& scenario, const CouplingState& state) {
  if (tech == Tech::Dot11p) return state.channel_busy;
  return std::min(1.0, state.transmit * scenario.vehicles / scenario.cv2x.csrs_per_subframe);
}

}  // namespace

FixedPointReport solve_coupled(Tech tech, const ScenarioConfig& config, const CouplingOptions& options) {
  validate(config);
  ScenarioConfig scenario = config;
  if (tech == Tech::Cv2x) resolve_rc_bounds(scenario);
  if (!(options.damping > 0.0 && options.damping <= 1.0)) {
    fail(ErrorCode::InvalidParameter, fmt::format("damping = {} outside (0, 1]", options.damping));
  }
  const int base = scenario.traffic.cam_interval;
  if (!scenario.adaptive_cam) return iterate(tech, scenario, options, base);

  const CamRatePolicy policy = options.cam_policy ? options.cam_policy : CamRatePolicy(adaptive_cam_rate);
  std::set<int> visited;
  int interval = base;
  for (;;) {
    FixedPointReport report = iterate(tech, scenario, options, interval);
    visited.insert(interval);
    const int proposed = policy(congestion_level(tech, scenario, report.state), base);
    if (proposed == interval) return report;
    if (visited.count(proposed)) {
      // The policy cycles between intervals; settle on the most conservative one.
      const int settle = std::max(*visited.rbegin(), proposed);
      return settle == interval ? report : iterate(tech, scenario, options, settle);
    }
    interval = proposed;
  }
}

int adaptive_cam_rate(double channel_busy, int base_interval) {
  const double load = std::clamp((channel_busy - 0.3) / 0.6, 0.0, 1.0);
  const double raw = base_interval * (1.0 + 4.0 * load);
  const int rounded = static_cast<int>(std::lround(raw / 100.0)) * 100;
  return std::clamp(rounded, 100, 1000);
}

}  // namespace v2xmac

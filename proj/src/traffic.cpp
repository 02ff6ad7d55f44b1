#include "v2xmac/traffic.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

#include "v2xmac/error.hpp"

namespace v2xmac {

double GeneratorSolution::total_mass() const {
  return std::accumulate(sent.begin(), sent.end(), 0.0) + std::accumulate(pending.begin(), pending.end(), 0.0) + idle;
}

std::vector<double> GeneratorSolution::flatten() const {
  std::vector<double> out(sent);
  out.insert(out.end(), pending.begin(), pending.end());
  if (has_idle) out.push_back(idle);
  return out;
}

namespace {

void check_transmit(double transmit) {
  if (!(transmit > 0.0)) {
    fail(ErrorCode::DegenerateTransmitProbability,
         fmt::format("P_t = {} leaves the blocked generator states without an exit", transmit));
  }
  if (transmit > 1.0) fail(ErrorCode::InvalidParameter, fmt::format("P_t = {} exceeds 1", transmit));
}

// Shared periodic part of both generators. `scale` is 1 for CAM and 1 - 1/K
// for DENM; `head` is the mass of (tx, 0).
void fill_periodic(GeneratorSolution& sol, int interval, double transmit, double head, double scale) {
  const double miss = 1.0 - transmit;
  // 1 - (1-P_t)^(T-1), kept accurate for small P_t.
  const double reach = -std::expm1((interval - 1) * std::log1p(-std::min(transmit, 1.0 - 1e-300)));
  const double renewal = transmit >= 1.0 ? 1.0 : reach;

  sol.sent.assign(interval, 0.0);
  sol.pending.assign(interval, 0.0);
  for (int j = 0; j < interval; ++j) {
    sol.pending[j] = head * scale * std::pow(miss, interval - j) / renewal;
  }
  sol.sent[0] = head;
  sol.sent[interval - 1] = head * scale * transmit;
  double tail = 0.0;  // sum of pending[l] for l > j
  for (int j = interval - 2; j >= 1; --j) {
    tail += sol.pending[j + 1];
    sol.sent[j] = transmit * (scale * head + tail);
  }
}

// T [1 - P_t (1-P_t)^(T-1)] / [1 - (1-P_t)^(T-1)]: mass of one periodic cycle
// relative to its generation state.
double cycle_weight(int interval, double transmit) {
  const double miss_pow = transmit >= 1.0 ? 0.0 : std::exp((interval - 1) * std::log1p(-transmit));
  const double reach = transmit >= 1.0 ? 1.0 : -std::expm1((interval - 1) * std::log1p(-transmit));
  return interval * (1.0 - transmit * miss_pow) / reach;
}

}  // namespace

GeneratorSolution solve_cam(int interval, double transmit) {
  check_transmit(transmit);
  if (interval < 2) fail(ErrorCode::InvalidParameter, fmt::format("CAM interval {} < 2", interval));
  GeneratorSolution sol;
  fill_periodic(sol, interval, transmit, 1.0 / cycle_weight(interval, transmit), 1.0);
  return sol;
}

GeneratorSolution solve_cam(const TrafficParams& params, double transmit) {
  return solve_cam(params.cam_interval, transmit);
}

GeneratorSolution solve_denm(int interval, int repetitions, double trigger_probability, double transmit) {
  check_transmit(transmit);
  if (interval < 2) fail(ErrorCode::InvalidParameter, fmt::format("DENM interval {} < 2", interval));
  if (repetitions < 1) fail(ErrorCode::InvalidParameter, fmt::format("K = {} < 1", repetitions));
  if (!(trigger_probability > 0.0 && trigger_probability <= 1.0)) {
    fail(ErrorCode::InvalidParameter, fmt::format("DENM trigger probability {} outside (0, 1]", trigger_probability));
  }
  const double k = repetitions;
  const double repeat = 1.0 - 1.0 / k;
  const double head =
      1.0 / (repeat * cycle_weight(interval, transmit) + 1.0 / k + 1.0 / (k * trigger_probability));
  GeneratorSolution sol;
  fill_periodic(sol, interval, transmit, head, repeat);
  sol.has_idle = true;
  sol.idle = head / (k * trigger_probability);
  return sol;
}

GeneratorSolution solve_denm(const TrafficParams& params, double transmit) {
  return solve_denm(params.denm_interval, params.denm_repetitions, params.trigger_probability(), transmit);
}

QueueTransitions combine_transition_probs(const GeneratorSolution& cam, const GeneratorSolution& denm, double transmit,
                                          const TrafficParams& params) {
  auto blocked_exit = [&](const GeneratorSolution& g) {
    return transmit * std::accumulate(g.pending.begin() + 1, g.pending.end(), 0.0);
  };

  double cam_growth = 0, cam_first = 0, cam_drain = 0, cam_head = 0;
  if (params.cam_enabled) {
    cam_growth = cam.pending.at(0);
    cam_first = cam.sent.at(0) * (1.0 - transmit);
    cam_drain = blocked_exit(cam);
    cam_head = cam.sent.at(0);
  }
  double denm_growth = 0, denm_first = 0, denm_drain = 0;
  if (params.denm_enabled) {
    const double repeat = 1.0 - 1.0 / params.denm_repetitions;
    denm_growth = denm.pending.at(0);
    denm_first = denm.sent.at(0) * repeat * (1.0 - transmit);
    denm_drain = blocked_exit(denm);
  }
  const double trigger = params.trigger_probability();

  QueueTransitions out;
  out.growth = union_probability(cam_growth, denm_growth);
  out.first_arrival = union_probability(cam_first, denm_first);
  out.drain = union_probability(cam_drain, denm_drain);
  out.arrival_when_empty = union_probability(cam_head, trigger);
  return out;
}

QueueTransitions queue_transitions(const TrafficParams& params, double transmit) {
  GeneratorSolution cam, denm;
  if (params.cam_enabled) cam = solve_cam(params, transmit);
  if (params.denm_enabled) denm = solve_denm(params, transmit);
  return combine_transition_probs(cam, denm, transmit, params);
}

QueueSolution solve_queue(double growth, double first_arrival, double drain, int capacity) {
  if (capacity < 1) fail(ErrorCode::InvalidParameter, fmt::format("queue capacity {} < 1", capacity));
  for (double p : {growth, first_arrival, drain}) {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidParameter, fmt::format("queue probability {} outside [0,1]", p));
  }
  QueueSolution sol;
  sol.transitions = {growth, first_arrival, drain, 0.0};
  sol.probs.assign(capacity + 1, 0.0);
  if (first_arrival == 0.0) {
    sol.probs[0] = 1.0;
    sol.empty = 1.0;
    return sol;
  }
  if (drain == 0.0) fail(ErrorCode::DegenerateQueue, "arrivals with zero drain probability never empty the queue");

  const double ratio = growth / drain;
  double occupied;  // sum_{i=1}^{M} alpha1 alpha^(i-1) / beta^i
  if (std::abs(1.0 - ratio) >= 1e-4) {
    occupied = first_arrival * (1.0 - std::pow(ratio, capacity)) / (drain - growth);
  } else {
    // Near alpha = beta the closed form is 0/0; sum the same geometric series directly.
    double term = 1.0, sum = 0.0;
    for (int i = 0; i < capacity; ++i, term *= ratio) sum += term;
    occupied = first_arrival / drain * sum;
  }
  const double empty = 1.0 / (1.0 + occupied);
  sol.probs[0] = empty;
  double level = empty * first_arrival / drain;
  for (int i = 1; i <= capacity; ++i, level *= ratio) sol.probs[i] = level;
  sol.empty = empty;
  return sol;
}

QueueSolution solve_queue(const QueueTransitions& t, int capacity) {
  QueueSolution sol = solve_queue(t.growth, t.first_arrival, t.drain, capacity);
  sol.transitions = t;
  return sol;
}

}  // namespace v2xmac

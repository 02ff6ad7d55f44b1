#pragma once

#include <vector>

#include "v2xmac/params.hpp"

namespace v2xmac {

/// Steady state of a CAM or DENM generator chain.
struct GeneratorSolution {
  std::vector<double> sent;     // (tx, j): packet went out, counting down to the next generation
  std::vector<double> pending;  // (tx', j): packet still waiting for an opportunity
  double idle = 0.0;            // DENM only
  bool has_idle = false;

  double total_mass() const;
  std::vector<double> flatten() const;  // chain_oracle enumeration order
};

/// Combined queue transition probabilities and the conditional arrival
/// probability handed to the MAC chains.
struct QueueTransitions {
  double growth = 0.0;              // alpha:  i -> i+1 for i >= 1
  double first_arrival = 0.0;       // alpha1: 0 -> 1
  double drain = 0.0;               // beta:   i -> i-1
  double arrival_when_empty = 0.0;  // P_arr
};

struct QueueSolution {
  std::vector<double> probs;  // queue length 0..M
  double empty = 1.0;         // P_qe = probs[0]
  QueueTransitions transitions;

  double nonempty() const { return 1.0 - empty; }
  int capacity() const { return static_cast<int>(probs.size()) - 1; }
};

GeneratorSolution solve_cam(int interval, double transmit);
GeneratorSolution solve_cam(const TrafficParams& params, double transmit);

GeneratorSolution solve_denm(int interval, int repetitions, double trigger_probability, double transmit);
GeneratorSolution solve_denm(const TrafficParams& params, double transmit);

/// Union rule x = x^C + x^D - x^C x^D.
inline double union_probability(double a, double b) { return a + b - a * b; }

/// A disabled source (params.cam_enabled / denm_enabled) contributes nothing.
QueueTransitions combine_transition_probs(const GeneratorSolution& cam, const GeneratorSolution& denm, double transmit,
                                          const TrafficParams& params);

/// Solves both generators at `transmit` and combines them.
QueueTransitions queue_transitions(const TrafficParams& params, double transmit);

QueueSolution solve_queue(double growth, double first_arrival, double drain, int capacity);
QueueSolution solve_queue(const QueueTransitions& transitions, int capacity);

}  // namespace v2xmac

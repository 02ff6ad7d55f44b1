#pragma once

#include <vector>

#include "v2xmac/params.hpp"

namespace v2xmac {

/// Existing backoff stages: 0, then 2..Č-1 (counter values 0 and 1 share stage 0).
std::vector<int> backoff_stages(int min_contention_window);

/// Probability of drawing `stage` after a busy period: 2/Č for stage 0, 1/Č otherwise.
double stage_selection_weight(int stage, int min_contention_window);

/// Steady state of the 802.11p contention chain. Per-stage families are
/// indexed by position in `stages`, not by the stage number itself.
struct Dot11pSolution {
  std::vector<int> stages;
  double idle = 0.0;
  std::vector<double> aifs;                        // A_1..A_W
  std::vector<double> busy;                        // (B, 1..V)
  std::vector<std::vector<double>> deferral;       // (D_s, 1..V)
  std::vector<std::vector<double>> backoff_aifs;   // (s, A_1..A_{W-1})
  std::vector<double> sensing;                     // (I, s)
  std::vector<double> transmit;                    // (Tx, 1..V)
  double theta = 0.0;
  double transmit_probability = 0.0;  // sum of (Tx, i)

  /// pi_{I,0} + pi_{A_W} + sum pi_Tx: the per-slot probability of being at
  /// (or in) a channel access.
  double access_probability() const;
  double total_mass() const;
  std::vector<double> flatten() const;  // chain_oracle enumeration order
};

/// ChannelSaturated if theta >= 1.
Dot11pSolution solve_dot11p(const Dot11pParams& params, double queue_empty, double arrival_when_empty, double theta);

/// 1 - (1 - P_t)^(N-1).
double update_theta(double transmit, int vehicles);

/// Expected remaining slots (through the end of the transmission) from each
/// non-idle state; Idle is 0 by convention.
struct DelayTable {
  std::vector<int> stages;
  std::vector<double> aifs;                       // D_{A_i}
  std::vector<double> busy;                       // D_{B,i}
  std::vector<std::vector<double>> deferral;      // D_{D_s,j}
  std::vector<std::vector<double>> backoff_aifs;  // D_{s,A_j}
  std::vector<double> sensing;                    // D_{I,s}
  std::vector<double> transmit;                   // D_{Tx,i}

  std::vector<double> flatten() const;  // chain_oracle order, Idle = 0
};

DelayTable state_delays(const Dot11pParams& params, double theta);

}  // namespace v2xmac

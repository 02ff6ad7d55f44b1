#pragma once

#include "v2xmac/coupling.hpp"
#include "v2xmac/cv2x.hpp"
#include "v2xmac/dot11p.hpp"
#include "v2xmac/params.hpp"
#include "v2xmac/traffic.hpp"

namespace v2xmac {

/// Probability that a reselection lands on a CSR reused by someone else
/// within one reservation cycle; derived from the cycle time of (1, 0).
/// ModelValidity if 1/pi_{1,0} <= Gamma - 1.
double reselection_probability(const Cv2xSolution& sol, const Cv2xParams& params);

/// ResourceExhaustion if N exceeds the CSRs of one selection window.
double collision_prob_cv2x(const Cv2xSolution& sol, const Cv2xParams& params, int vehicles);

/// NoTransmitter if the access probability is 0.
double collision_prob_dot11p(const Dot11pSolution& sol, int vehicles);

/// Mean generation-to-transmission delay in subframes (= ms).
/// EmptySystem if P_qe = 1.
double avg_delay_cv2x(const QueueSolution& queue, double tx_opportunity);

struct Dot11pDelay {
  double fixed_part = 0.0;     // transmission + AIFS terms
  double residual_part = 0.0;  // backoff/deferral states, conditioned
  double slots = 0.0;
  double slot_time_us = 13.0;

  double microseconds() const { return slots * slot_time_us; }
  double milliseconds() const { return microseconds() / 1000.0; }
};

/// DegenerateConditional if the conditioning mass is 0.
Dot11pDelay avg_delay_dot11p(const Dot11pSolution& sol, const DelayTable& delays, const Dot11pParams& params);

/// Successful simultaneous users; C-V2X is normalized by the CSRs of one subframe.
double channel_utilization(Tech tech, double transmit, int vehicles, double collision, const Cv2xParams& cv2x = {});

struct MetricsReport {
  Tech tech = Tech::Cv2x;
  int vehicles = 0;
  double collision = 0.0;        // P_col
  double delay_ms = 0.0;         // d_avg
  double delay_slots = 0.0;      // 802.11p only
  bool delay_defined = true;     // false when the conditional mass vanished
  double utilization = 0.0;      // CU_avg
  double transmit = 0.0;         // P_t
  double tx_opportunity = 0.0;   // P_txo (C-V2X)
  double theta = 0.0;            // channel busy ratio (802.11p)
  double queue_empty = 0.0;      // P_qe
  int total_csrs = 0;            // C-V2X
  FixedPointReport fixed_point;
};

/// Solves the coupled model and evaluates all metrics at the fixed point.
MetricsReport evaluate(Tech tech, const ScenarioConfig& scenario, const CouplingOptions& options = {});

}  // namespace v2xmac

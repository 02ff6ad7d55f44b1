#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace v2xmac {

enum class Tech { Cv2x, Dot11p };

std::string_view to_string(Tech tech);

/// Packet sources and the shared device queue. Times are in 1 ms subframes.
struct TrafficParams {
  int cam_interval = 100;          // T_C
  int denm_interval = 100;         // T_D
  int denm_repetitions = 5;        // K, mean generations per DENM event
  double denm_rate = 1.0;          // lambda, events per second
  double trigger_window_s = 0.001; // one subframe
  int queue_capacity = 10;         // M
  bool cam_enabled = true;
  bool denm_enabled = true;

  /// Per-step probability that the DENM idle state fires.
  double trigger_probability() const {
    return denm_enabled ? -std::expm1(-denm_rate * trigger_window_s) : 0.0;
  }

  bool operator==(const TrafficParams&) const = default;
};

struct RcBounds {
  int low = 5;
  int high = 15;

  bool operator==(const RcBounds&) const = default;
};

/// Standard resource-counter range for one of the three selection windows;
/// nullopt for non-standard windows.
std::optional<RcBounds> standard_rc_bounds(int selection_window);

struct Cv2xParams {
  int selection_window = 100;        // Gamma, subframes
  int rc_low = 5;                    // R_l
  int rc_high = 15;                  // R_h
  double keep_probability = 0.4;     // P_rk
  double schedule_probability = 1.0; // P_sch
  int csrs_per_subframe = 25;

  int total_csrs() const { return csrs_per_subframe * selection_window; }

  bool operator==(const Cv2xParams&) const = default;
};

struct Dot11pParams {
  int min_contention_window = 15;  // Č
  int aifsn = 6;
  double slot_time_us = 13.0;
  double sifs_time_us = 32.0;
  int tx_slots = 14;               // slots needed for one 134-byte frame at 6 Mbps

  /// AIFS length in whole slots.
  int aifs_slots() const {
    return static_cast<int>(std::ceil((sifs_time_us + aifsn * slot_time_us) / slot_time_us - 1e-12));
  }

  bool operator==(const Dot11pParams&) const = default;
};

/// One swept field: either an arithmetic range or an explicit value list.
struct SweepAxis {
  std::string parameter;
  std::vector<double> values;
  std::string spec;  // textual form, kept for round-tripping

  bool operator==(const SweepAxis&) const = default;
};

struct ScenarioConfig {
  bool run_cv2x = true;
  bool run_dot11p = true;
  int vehicles = 100;  // N
  TrafficParams traffic;
  Cv2xParams cv2x;
  bool rc_bounds_explicit = false;
  Dot11pParams dot11p;
  bool adaptive_cam = false;
  std::vector<SweepAxis> sweep;

  std::vector<Tech> techs() const;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Throws ModelError(InvalidParameter) naming the offending field.
void validate(const ScenarioConfig& config);
void validate(const TrafficParams& traffic);
void validate(const Cv2xParams& cv2x);
void validate(const Dot11pParams& dot11p);

/// Re-derives R_l/R_h from the selection window unless they were set explicitly.
void resolve_rc_bounds(ScenarioConfig& config);

}  // namespace v2xmac

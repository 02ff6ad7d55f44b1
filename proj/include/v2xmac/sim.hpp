#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "v2xmac/params.hpp"

namespace v2xmac {

enum class SimEventKind { Generation, Enqueue, Drop, Reservation, Transmission, Collision };

std::string_view to_string(SimEventKind kind);

struct SimEvent {
  std::int64_t time_us = 0;
  int vehicle = 0;
  SimEventKind kind = SimEventKind::Generation;
  std::string detail;
};

/// Receives events in time order. One line per event in the stable text form
/// `time_us,vehicle,event,detail` is produced by format_event.
using TraceSink = std::function<void(const SimEvent&)>;

std::string format_event(const SimEvent& e);
inline constexpr std::string_view kTraceHeader = "time_us,vehicle,event,detail";

struct SimOptions {
  std::uint64_t seed = 1;
  double duration_s = 60.0;
  int replications = 20;
  double warmup_s = 2.0;
  int jobs = 1;
  TraceSink trace;  // when set, only replication 0 is traced
};

/// Whole-run event counts (warm-up included), summed over replications.
struct SimCounters {
  std::int64_t generated = 0;
  std::int64_t enqueued = 0;
  std::int64_t dropped = 0;
  std::int64_t transmitted = 0;
  std::int64_t collided = 0;       // transmissions that overlapped another one
  std::int64_t collision_events = 0;
  std::int64_t reservations = 0;   // C-V2X resource selections
  std::int64_t in_queue_at_end = 0;
  std::int64_t aifs_violations = 0;        // 802.11p: access with fewer than W idle slots observed
  std::int64_t half_duplex_violations = 0; // C-V2X: own transmit subframe picked outside the fallback

  SimCounters& operator+=(const SimCounters& o);
  bool operator==(const SimCounters&) const = default;
};

struct Estimate {
  double mean = 0.0;
  double ci95 = 0.0;  // 1.96 s / sqrt(R); 0 with a single replication
  bool operator==(const Estimate&) const = default;
};

/// Post-warm-up statistics of one replication.
struct ReplicationStats {
  std::int64_t transmissions = 0;
  std::int64_t collided = 0;
  std::int64_t delays = 0;
  double delay_sum_ms = 0.0;
  std::int64_t successes = 0;
  double utilization = 0.0;
  SimCounters counters;

  double collision() const { return transmissions ? double(collided) / transmissions : 0.0; }
  double delay_ms() const { return delays ? delay_sum_ms / delays : 0.0; }
};

struct SimReport {
  Tech tech = Tech::Cv2x;
  Estimate collision;    // collided / transmitted
  Estimate delay_ms;     // C-V2X: generation to transmission subframe; 802.11p: generation to end of transmission
  Estimate utilization;  // successful simultaneous users (C-V2X: per CSR of one subframe)
  std::int64_t drops = 0;
  std::int64_t transmissions = 0;  // post-warm-up, all replications
  bool unreliable = false;         // fewer than 100 post-warm-up transmissions
  int replications = 0;
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  std::string sensing_model;
  SimCounters counters;
  std::vector<ReplicationStats> per_replication;
};

/// One replication; deterministic in (scenario, seed, replication).
ReplicationStats run_replication(Tech tech, const ScenarioConfig& scenario, std::uint64_t seed, int replication,
                                 double duration_s, double warmup_s, const TraceSink& trace = {});

/// InvalidDuration if duration_s < 10 or replications < 1.
SimReport run_sim(Tech tech, const ScenarioConfig& scenario, const SimOptions& options);

/// Merges per-replication statistics in replication order.
SimReport merge_replications(Tech tech, std::vector<ReplicationStats> reps, const SimOptions& options);

}  // namespace v2xmac

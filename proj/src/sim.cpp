#include "v2xmac/sim.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <random>
#include <thread>

#include "v2xmac/error.hpp"

namespace v2xmac {

std::string_view to_string(SimEventKind kind) {
  switch (kind) {
    case SimEventKind::Generation: return "generation";
    case SimEventKind::Enqueue: return "enqueue";
    case SimEventKind::Drop: return "drop";
    case SimEventKind::Reservation: return "reservation";
    case SimEventKind::Transmission: return "transmission";
    case SimEventKind::Collision: return "collision";
  }
  return "?";
}

std::string format_event(const SimEvent& e) {
  return fmt::format("{},{},{},{}", e.time_us, e.vehicle, to_string(e.kind), e.detail);
}

SimCounters& SimCounters::operator+=(const SimCounters& o) {
  generated += o.generated;
  enqueued += o.enqueued;
  dropped += o.dropped;
  transmitted += o.transmitted;
  collided += o.collided;
  collision_events += o.collision_events;
  reservations += o.reservations;
  in_queue_at_end += o.in_queue_at_end;
  aifs_violations += o.aifs_violations;
  half_duplex_violations += o.half_duplex_violations;
  return *this;
}

namespace {

constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max() / 4;

std::mt19937_64 vehicle_rng(std::uint64_t seed, int replication, int vehicle) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(vehicle)};
  return std::mt19937_64(seq);
}

// Per-vehicle CAM/DENM source on the 1 ms grid. CAMs are periodic with a
// random phase; a DENM event fires with probability r per subframe and then
// repeats K-1 more times every T_D.
class PacketSource {
 public:
  enum class Kind { Cam, Denm };

  PacketSource(const TrafficParams& p, std::mt19937_64& rng) : params_(p), trigger_(p.trigger_probability()) {
    if (p.cam_enabled) next_cam_ = std::uniform_int_distribution<std::int64_t>(0, p.cam_interval - 1)(rng);
    if (p.denm_enabled) next_denm_ = wait_for_trigger(0, rng);
  }

  std::int64_t next_ms() const { return std::min(next_cam_, next_denm_); }

  Kind pop(std::mt19937_64& rng) {
    if (next_cam_ <= next_denm_) {
      next_cam_ += params_.cam_interval;
      return Kind::Cam;
    }
    const std::int64_t now = next_denm_;
    if (repeats_left_ == 0) repeats_left_ = params_.denm_repetitions;  // new event
    --repeats_left_;
    next_denm_ = repeats_left_ > 0 ? now + params_.denm_interval : wait_for_trigger(now, rng);
    return Kind::Denm;
  }

 private:
  std::int64_t wait_for_trigger(std::int64_t now, std::mt19937_64& rng) const {
    if (!(trigger_ > 0.0)) return kNever;
    return now + 1 + std::geometric_distribution<std::int64_t>(trigger_)(rng);
  }

  TrafficParams params_;
  double trigger_;
  std::int64_t next_cam_ = kNever;
  std::int64_t next_denm_ = kNever;
  int repeats_left_ = 0;
};

// Counters, trace emission and the shared queue-offer logic.
class Recorder {
 public:
  Recorder(const TraceSink& sink, double us_per_unit) : sink_(sink), us_per_unit_(us_per_unit) {}

  template <typename... Args>
  void emit(std::int64_t time, int vehicle, SimEventKind kind, fmt::format_string<Args...> f, Args&&... args) {
    if (!sink_) return;
    sink_(SimEvent{static_cast<std::int64_t>(std::llround(time * us_per_unit_)), vehicle, kind,
                   fmt::format(f, std::forward<Args>(args)...)});
  }

  // Generation of one packet at `time` (in simulation units).
  void offer(std::deque<std::int64_t>& queue, int capacity, std::int64_t time, int vehicle, PacketSource::Kind kind) {
    ++counters.generated;
    emit(time, vehicle, SimEventKind::Generation, "{}", kind == PacketSource::Kind::Cam ? "cam" : "denm");
    if (static_cast<int>(queue.size()) < capacity) {
      queue.push_back(time);
      ++counters.enqueued;
      emit(time, vehicle, SimEventKind::Enqueue, "len={}", queue.size());
    } else {
      ++counters.dropped;
      emit(time, vehicle, SimEventKind::Drop, "len={}", queue.size());
    }
  }

  SimCounters counters;

 private:
  const TraceSink& sink_;
  double us_per_unit_;
};

// ---------------------------------------------------------------- C-V2X

struct Cv2xVehicle {
  std::mt19937_64 rng;
  PacketSource source;
  std::deque<std::int64_t> queue;
  bool reserved = false;
  bool announced = false;  // reservation visible to others once its first SCI went out
  std::int64_t next_tx = 0;
  int csr = 0;
  int rc = 0;
  std::int64_t last_tx = -1;
};

class Cv2xRun {
 public:
  Cv2xRun(const ScenarioConfig& s, std::uint64_t seed, int rep, std::int64_t end_ms, std::int64_t warm_ms,
          const TraceSink& trace)
      : s_(s), p_(s.cv2x), end_(end_ms), warm_(warm_ms), rec_(trace, 1000.0) {
    for (int v = 0; v < s.vehicles; ++v) {
      auto rng = vehicle_rng(seed, rep, v);
      PacketSource src(s.traffic, rng);
      cars_.push_back(Cv2xVehicle{std::move(rng), std::move(src), {}, false, false, 0, 0, 0, -1});
    }
  }

  ReplicationStats run() {
    const int csrs = p_.csrs_per_subframe;
    for (int v = 0; v < s_.vehicles; ++v) select(v, 0);

    std::vector<std::pair<int, int>> tx;  // (csr, vehicle)
    for (std::int64_t t = 0; t < end_; ++t) {
      for (int v = 0; v < s_.vehicles; ++v) {
        auto& car = cars_[v];
        while (car.source.next_ms() == t) rec_.offer(car.queue, s_.traffic.queue_capacity, t, v, car.source.pop(car.rng));
        if (!car.reserved && !car.queue.empty()) select(v, t);
      }

      tx.clear();
      for (int v = 0; v < s_.vehicles; ++v) {
        auto& car = cars_[v];
        if (!car.reserved || car.next_tx != t) continue;
        if (car.queue.empty()) {
          car.next_tx += p_.selection_window;  // reservation and counter held
          continue;
        }
        tx.emplace_back(car.csr, v);
      }
      std::sort(tx.begin(), tx.end());
      for (size_t k = 0; k < tx.size();) {
        size_t e = k;
        while (e < tx.size() && tx[e].first == tx[k].first) ++e;
        const bool collided = e - k >= 2;
        if (collided) ++rec_.counters.collision_events;
        for (size_t m = k; m < e; ++m) transmit(tx[m].second, t, collided);
        if (collided) {
          for (size_t m = k; m < e; ++m) {
            rec_.emit(t, tx[m].second, SimEventKind::Collision, "csr={}", tx[k].first);
          }
        }
        k = e;
      }
    }

    stats_.counters = rec_.counters;
    for (const auto& car : cars_) stats_.counters.in_queue_at_end += static_cast<std::int64_t>(car.queue.size());
    const double measured = static_cast<double>(end_ - warm_) * csrs;
    stats_.utilization = measured > 0 ? stats_.successes / measured : 0.0;
    return stats_;
  }

 private:
  void transmit(int v, std::int64_t t, bool collided) {
    auto& car = cars_[v];
    const std::int64_t gen = car.queue.front();
    car.queue.pop_front();
    ++rec_.counters.transmitted;
    if (collided) ++rec_.counters.collided;
    rec_.emit(t, v, SimEventKind::Transmission, "csr={}", car.csr);
    if (t >= warm_) {
      ++stats_.transmissions;
      if (collided) ++stats_.collided; else ++stats_.successes;
    }
    if (gen >= warm_) {
      ++stats_.delays;
      stats_.delay_sum_ms += static_cast<double>(t - gen);
    }
    car.last_tx = t;
    car.announced = true;
    if (--car.rc > 0) {
      car.next_tx += p_.selection_window;
      return;
    }
    if (std::bernoulli_distribution(p_.keep_probability)(car.rng)) {
      car.rc = draw_counter(car);
      car.next_tx += p_.selection_window;
      return;
    }
    select(v, t);
  }

  int draw_counter(Cv2xVehicle& car) { return std::uniform_int_distribution<int>(p_.rc_low, p_.rc_high)(car.rng); }

  // Steps 1-3 of semi-persistent scheduling with SCI-announced occupancy in
  // place of received power.
  void select(int v, std::int64_t t) {
    auto& car = cars_[v];
    car.reserved = false;
    car.announced = false;
    if (!std::bernoulli_distribution(p_.schedule_probability)(car.rng)) return;

    const int gamma = p_.selection_window;
    const int csrs = p_.csrs_per_subframe;
    const int span = gamma - 1;  // subframes t+1 .. t+Gamma-1
    const int cells = span * csrs;
    blocked_.assign(cells, 0);
    load_.assign(span, 0);
    for (int u = 0; u < s_.vehicles; ++u) {
      const auto& other = cars_[u];
      if (u == v || !other.reserved || !other.announced) continue;
      std::int64_t s = other.next_tx;
      if (s < t + 1) s += gamma * ((t + 1 - s + gamma - 1) / gamma);
      if (s > t + span) continue;
      blocked_[(s - t - 1) * csrs + other.csr] = 1;
      ++load_[s - t - 1];
    }
    int own = -1;  // half-duplex: the subframe we transmitted in one period ago
    if (car.last_tx >= 0) {
      const std::int64_t s = car.last_tx + gamma * ((t + 1 - car.last_tx + gamma - 1) / gamma);
      if (s <= t + span) own = static_cast<int>(s - t - 1);
    }
    if (own >= 0) {
      for (int c = 0; c < csrs; ++c) blocked_[own * csrs + c] = 1;
    }

    candidates_.clear();
    for (int k = 0; k < cells; ++k) {
      if (!blocked_[k]) candidates_.push_back(k);
    }
    const int quota = std::max(1, static_cast<int>(std::ceil(0.2 * cells)));
    const bool fallback = static_cast<int>(candidates_.size()) < quota;
    if (fallback) {
      candidates_.resize(cells);
      for (int k = 0; k < cells; ++k) candidates_[k] = k;
    }

    std::uniform_real_distribution<double> noise(0.0, 1.0);
    ranked_.clear();
    for (int k : candidates_) ranked_.emplace_back(load_[k / csrs] + noise(car.rng), k);
    std::nth_element(ranked_.begin(), ranked_.begin() + (quota - 1), ranked_.end());
    const int pick = ranked_[std::uniform_int_distribution<int>(0, quota - 1)(car.rng)].second;

    const int offset = pick / csrs;
    if (!fallback && offset == own) ++rec_.counters.half_duplex_violations;
    car.reserved = true;
    car.next_tx = t + 1 + offset;
    car.csr = pick % csrs;
    car.rc = draw_counter(car);
    ++rec_.counters.reservations;
    rec_.emit(t, v, SimEventKind::Reservation, "subframe={},csr={},rc={}", car.next_tx, car.csr, car.rc);
  }

  const ScenarioConfig& s_;
  const Cv2xParams& p_;
  std::int64_t end_, warm_;
  Recorder rec_;
  std::vector<Cv2xVehicle> cars_;
  ReplicationStats stats_;
  std::vector<char> blocked_;
  std::vector<int> load_;
  std::vector<int> candidates_;
  std::vector<std::pair<double, int>> ranked_;
};

// ------------------------------------------------------------- 802.11p

enum class Phase { Inactive, Aifs, BusyWait, BackoffAifs, Defer, Backoff, Transmit, PostTx };

struct Dot11pVehicle {
  std::mt19937_64 rng;
  PacketSource source;
  std::deque<std::int64_t> queue;  // generation slots
  Phase phase = Phase::Inactive;
  int count = 0;     // AIFS slots sensed idle in the current phase
  int stage = 0;     // backoff stage
  int tx_left = 0;
  int idle_run = 0;  // consecutive idle slots observed
  std::int64_t tx_start = 0;
  bool collided = false;
  double offset_ms = 0.0;  // sub-millisecond phase of this vehicle's packet clock
};

class Dot11pRun {
 public:
  Dot11pRun(const ScenarioConfig& s, std::uint64_t seed, int rep, double duration_s, double warmup_s,
            const TraceSink& trace)
      : s_(s), p_(s.dot11p), aifs_(p_.aifs_slots()), rec_(trace, p_.slot_time_us) {
    end_ = slot_of(duration_s * 1000.0);
    warm_ = slot_of(warmup_s * 1000.0);
    for (int v = 0; v < s.vehicles; ++v) {
      auto rng = vehicle_rng(seed, rep, v);
      PacketSource src(s.traffic, rng);
      cars_.push_back(Dot11pVehicle{std::move(rng), std::move(src), {}});
      cars_[v].offset_ms = std::uniform_real_distribution<double>(0.0, 1.0)(cars_[v].rng);
      arrivals_.emplace(arrival_slot(cars_[v]), v);
    }
  }

  ReplicationStats run() {
    std::int64_t slot = 0;
    std::vector<int> next_active;
    while (slot < end_) {
      if (active_.empty()) {
        if (arrivals_.empty()) break;
        slot = std::max(slot, arrivals_.top().first);
        if (slot >= end_) break;
      }
      while (!arrivals_.empty() && arrivals_.top().first <= slot) {
        const int v = arrivals_.top().second;
        arrivals_.pop();
        auto& car = cars_[v];
        const std::int64_t ms = car.source.next_ms();
        while (car.source.next_ms() == ms) rec_.offer(car.queue, s_.traffic.queue_capacity, slot, v, car.source.pop(car.rng));
        if (car.phase == Phase::Inactive && !car.queue.empty()) {
          car.phase = Phase::Aifs;
          car.count = 0;
          car.idle_run = 0;
          active_.push_back(v);
        }
        if (car.source.next_ms() < kNever) arrivals_.emplace(arrival_slot(car), v);
      }

      int talkers = 0;
      for (int v : active_) {
        if (cars_[v].phase == Phase::Transmit) ++talkers;
      }
      if (talkers >= 2) {
        bool fresh = false;
        for (int v : active_) {
          auto& car = cars_[v];
          if (car.phase != Phase::Transmit || car.collided) continue;
          car.collided = true;
          ++rec_.counters.collided;
          fresh = true;
          rec_.emit(slot, v, SimEventKind::Collision, "n={}", talkers);
        }
        if (fresh) ++rec_.counters.collision_events;
      }

      next_active.clear();
      for (int v : active_) {
        const bool self = cars_[v].phase == Phase::Transmit;
        if (step(v, slot, talkers - (self ? 1 : 0) > 0)) next_active.push_back(v);
      }
      active_.swap(next_active);
      ++slot;
    }

    stats_.counters = rec_.counters;
    for (const auto& car : cars_) {
      // A frame still on air is already counted as transmitted.
      const bool on_air = car.phase == Phase::Transmit && car.tx_left < p_.tx_slots;
      stats_.counters.in_queue_at_end += static_cast<std::int64_t>(car.queue.size()) - (on_air ? 1 : 0);
    }
    const double measured = static_cast<double>(end_ - warm_);
    stats_.utilization = measured > 0 ? static_cast<double>(stats_.successes) * p_.tx_slots / measured : 0.0;
    return stats_;
  }

 private:
  std::int64_t slot_of(double ms) const {
    return static_cast<std::int64_t>(std::floor(ms * 1000.0 / p_.slot_time_us + 1e-9));
  }

  // Packets are generated on the 1 ms grid of the traffic model; each vehicle
  // runs that grid with its own phase so that distinct vehicles do not share
  // generation slots by construction.
  std::int64_t arrival_slot(const Dot11pVehicle& car) const {
    return slot_of(static_cast<double>(car.source.next_ms()) + car.offset_ms);
  }

  void start_transmission(Dot11pVehicle& car, std::int64_t slot) {
    if (car.idle_run < aifs_) ++rec_.counters.aifs_violations;
    car.phase = Phase::Transmit;
    car.tx_left = p_.tx_slots;
    car.tx_start = slot + 1;
    car.collided = false;
  }

  void choose_stage(Dot11pVehicle& car) {
    const int counter = std::uniform_int_distribution<int>(0, p_.min_contention_window - 1)(car.rng);
    car.stage = counter == 1 ? 0 : counter;
  }

  // Advances one vehicle through `slot`; returns false when it goes inactive.
  bool step(int v, std::int64_t slot, bool busy) {
    auto& car = cars_[v];
    if (car.phase != Phase::Transmit) car.idle_run = busy ? 0 : car.idle_run + 1;
    switch (car.phase) {
      case Phase::Inactive: return false;
      case Phase::Transmit:
        if (car.tx_left == p_.tx_slots) {
          ++rec_.counters.transmitted;
          rec_.emit(slot, v, SimEventKind::Transmission, "slots={}", p_.tx_slots);
        }
        if (--car.tx_left == 0) finish(v, slot);
        return true;
      case Phase::PostTx:
        if (car.queue.empty()) {
          car.phase = Phase::Inactive;
          return false;
        }
        car.phase = Phase::Aifs;
        car.count = 0;
        return true;
      case Phase::Aifs:
        if (busy) {
          car.phase = Phase::BusyWait;
        } else if (++car.count == aifs_) {
          start_transmission(car, slot);
        }
        return true;
      case Phase::BusyWait:
        if (!busy) {
          choose_stage(car);
          enter_backoff_aifs(car);
        }
        return true;
      case Phase::Defer:
        if (!busy) enter_backoff_aifs(car);
        return true;
      case Phase::BackoffAifs:
        if (busy) {
          car.phase = Phase::Defer;
        } else if (++car.count >= aifs_ - 1) {
          car.phase = Phase::Backoff;
        }
        return true;
      case Phase::Backoff:
        if (busy) {
          car.phase = Phase::Defer;
        } else if (car.stage == 0) {
          start_transmission(car, slot);
        } else {
          car.stage = car.stage == 2 ? 0 : car.stage - 1;
        }
        return true;
    }
    return true;
  }

  // The idle slot that ended the busy period is the first backoff-AIFS slot.
  void enter_backoff_aifs(Dot11pVehicle& car) {
    car.count = 1;
    car.phase = car.count >= aifs_ - 1 ? Phase::Backoff : Phase::BackoffAifs;
  }

  void finish(int v, std::int64_t slot) {
    auto& car = cars_[v];
    const std::int64_t gen = car.queue.front();
    car.queue.pop_front();
    if (car.tx_start >= warm_) {
      ++stats_.transmissions;
      if (car.collided) ++stats_.collided; else ++stats_.successes;
    }
    if (gen >= warm_) {
      ++stats_.delays;
      stats_.delay_sum_ms += static_cast<double>(slot + 1 - gen) * p_.slot_time_us / 1000.0;
    }
    car.phase = Phase::PostTx;
  }

  const ScenarioConfig& s_;
  const Dot11pParams& p_;
  int aifs_;
  std::int64_t end_ = 0, warm_ = 0;
  Recorder rec_;
  std::vector<Dot11pVehicle> cars_;
  std::vector<int> active_;
  using Arrival = std::pair<std::int64_t, int>;
  std::priority_queue<Arrival, std::vector<Arrival>, std::greater<>> arrivals_;
  ReplicationStats stats_;
};

Estimate estimate(const std::vector<double>& xs) {
  Estimate e;
  if (xs.empty()) return e;
  double sum = 0.0;
  for (double x : xs) sum += x;
  e.mean = sum / xs.size();
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    e.ci95 = 1.96 * std::sqrt(ss / (xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
  }
  return e;
}

}  // namespace

ReplicationStats run_replication(Tech tech, const ScenarioConfig& scenario, std::uint64_t seed, int replication,
                                 double duration_s, double warmup_s, const TraceSink& trace) {
  if (tech == Tech::Cv2x) {
    ScenarioConfig resolved = scenario;
    resolve_rc_bounds(resolved);
    Cv2xRun run(resolved, seed, replication, std::llround(duration_s * 1000.0), std::llround(warmup_s * 1000.0),
                trace);
    return run.run();
  }
  Dot11pRun run(scenario, seed, replication, duration_s, warmup_s, trace);
  return run.run();
}

SimReport merge_replications(Tech tech, std::vector<ReplicationStats> reps, const SimOptions& options) {
  SimReport r;
  r.tech = tech;
  r.replications = static_cast<int>(reps.size());
  r.seed = options.seed;
  r.duration_s = options.duration_s;
  r.sensing_model = tech == Tech::Cv2x ? "sci-occupancy+noise-rank" : "slotted-carrier-sense";
  std::vector<double> col, del, cu;
  for (const auto& rep : reps) {
    col.push_back(rep.collision());
    del.push_back(rep.delay_ms());
    cu.push_back(rep.utilization);
    r.counters += rep.counters;
    r.transmissions += rep.transmissions;
  }
  r.collision = estimate(col);
  r.delay_ms = estimate(del);
  r.utilization = estimate(cu);
  r.drops = r.counters.dropped;
  r.unreliable = r.transmissions < 100;
  r.per_replication = std::move(reps);
  return r;
}

SimReport run_sim(Tech tech, const ScenarioConfig& scenario, const SimOptions& options) {
  validate(scenario);
  if (!(options.duration_s >= 10.0)) {
    fail(ErrorCode::InvalidDuration, fmt::format("duration {} s is below the 10 s minimum", options.duration_s));
  }
  if (options.replications < 1) {
    fail(ErrorCode::InvalidDuration, fmt::format("replications = {} < 1", options.replications));
  }
  if (!(options.warmup_s >= 0.0 && options.warmup_s < options.duration_s)) {
    fail(ErrorCode::InvalidDuration, fmt::format("warm-up {} s must lie inside the run", options.warmup_s));
  }

  const int n = options.replications;
  std::vector<ReplicationStats> reps(n);
  auto one = [&](int k) {
    reps[k] = run_replication(tech, scenario, options.seed, k, options.duration_s, options.warmup_s,
                              k == 0 ? options.trace : TraceSink{});
  };
  const int jobs = std::clamp(options.jobs, 1, n);
  if (jobs == 1) {
    for (int k = 0; k < n; ++k) one(k);
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int k = next++; k < n; k = next++) one(k);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return merge_replications(tech, std::move(reps), options);
}

}  // namespace v2xmac

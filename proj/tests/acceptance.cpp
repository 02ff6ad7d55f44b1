// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "v2xmac/chain_oracle.hpp"
#include "v2xmac/config.hpp"
#include "v2xmac/metrics.hpp"
#include "v2xmac/report.hpp"
#include "v2xmac/sim.hpp"

using namespace v2xmac;

namespace {

constexpr double kOracleTolerance = 1e-9;
constexpr double kOracleSeconds = 60.0;
constexpr double kInitialGap = 1e-7;
constexpr double kFlatDelay = 0.05;       // relative spread of C-V2X delay over N
constexpr double kCuTolerancePp = 3.0;    // percentage points
constexpr double kCuDrop11p = 17.95;
constexpr double kCuDropV2x = 2.80;
constexpr int kLocalOptimum = 300;
constexpr double kMaxDelay11pMs = 5.0;
constexpr double kMinDelayV2xMs = 10.0;
constexpr int kSimReplications = 20;
constexpr double kSimSeconds = 60.0;

const std::vector<int> kGridN = {50, 100, 150, 200, 250, 300};
const std::vector<int> kWindows = {20, 50, 100};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void verdict(int id, bool pass, const std::string& what, const std::string& detail) {
  if (!pass) ++failures;
  fmt::print("criterion {}: {} {} | {}\n", id, pass ? "PASS" : "FAIL", what, detail);
  std::fflush(stdout);
}

ScenarioConfig point(int vehicles, int window = 100) {
  ScenarioConfig s;
  s.vehicles = vehicles;
  s.cv2x.selection_window = window;
  resolve_rc_bounds(s);
  return s;
}

std::string join(const std::vector<double>& xs, const char* fmt_spec = "{:.4g}") {
  std::string out;
  for (double x : xs) out += (out.empty() ? "" : " ") + fmt::format(fmt::runtime(fmt_spec), x);
  return out;
}

// ------------------------------------------------------------------ 1

double oracle_gap(const std::vector<double>& closed, const TransitionMatrix& m) {
  const auto pi = solve_steady_state(m);
  if (closed.size() != pi.probs.size()) return INFINITY;
  double gap = 0.0;
  for (size_t k = 0; k < closed.size(); ++k) gap = std::max(gap, std::abs(closed[k] - pi.probs[k]));
  return gap;
}

void oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int windows[] = {20, 50, 100};
  const double keeps[] = {0.0, 0.4, 0.8};
  std::map<std::string, double> worst = {{"cam", 0}, {"denm", 0}, {"queue", 0}, {"cv2x", 0}, {"dot11p", 0}};
  const int points = 200;
  for (int k = 0; k < points; ++k) {
    TrafficParams t;
    t.cam_interval = 100 * (1 + k % 10);
    t.denm_interval = 100 * (1 + (k / 10) % 3);
    t.denm_repetitions = std::array{1, 5, 9}[(k / 30) % 3];
    t.denm_rate = (k / 90) % 2 ? 1.0 : 0.2;
    const double pt = std::exp(std::log(1e-3) * u(rng));  // log-uniform in [1e-3, 1]

    const auto cam = solve_cam(t, pt);
    worst["cam"] = std::max(worst["cam"], oracle_gap(cam.flatten(), build_cam_chain(t.cam_interval, pt)));
    const auto denm = solve_denm(t, pt);
    worst["denm"] = std::max(
        worst["denm"], oracle_gap(denm.flatten(), build_denm_chain(t.denm_interval, t.denm_repetitions,
                                                                    t.trigger_probability(), pt)));
    const auto q = queue_transitions(t, pt);
    const auto queue = solve_queue(q, t.queue_capacity);
    worst["queue"] = std::max(worst["queue"], oracle_gap(queue.probs, build_queue_chain(q.growth, q.first_arrival,
                                                                                         q.drain, t.queue_capacity)));

    ScenarioConfig s = point(100, windows[k % 3]);
    s.cv2x.keep_probability = keeps[(k / 3) % 3];
    const double qne = std::max(queue.nonempty(), 1e-3);
    const auto v2x = solve_cv2x(s.cv2x, 1.0 - qne, qne, q.arrival_when_empty);
    worst["cv2x"] = std::max(worst["cv2x"],
                             oracle_gap(v2x.flatten(), build_cv2x_chain(s.cv2x, qne, q.arrival_when_empty)));

    s.dot11p.aifsn = k % 4 == 3 ? 9 : 6;
    const double theta = 0.95 * u(rng);
    const auto p11 = solve_dot11p(s.dot11p, queue.empty, q.arrival_when_empty, theta);
    worst["dot11p"] = std::max(
        worst["dot11p"],
        oracle_gap(p11.flatten(), build_dot11p_chain(s.dot11p, queue.empty, q.arrival_when_empty, theta)));
  }
  double overall = 0.0;
  std::string detail;
  for (const auto& [name, gap] : worst) {
    overall = std::max(overall, gap);
    detail += fmt::format("{}={:.2e} ", name, gap);
  }
  const double secs = seconds_since(t0);
  verdict(1, overall <= kOracleTolerance && secs < kOracleSeconds,
          fmt::format("closed forms vs oracle, {} points x 5 chains, max gap <= {:g}, < {:g} s", points,
                      kOracleTolerance, kOracleSeconds),
          fmt::format("{}time={:.1f}s", detail, secs));
}

// ------------------------------------------------------------------ 2

void fixed_point_robustness() {
  const auto t0 = Clock::now();
  const CouplingState starts[] = {{0.5, 0.1, 0.9, 0.5, 0.5},
                                  {0.001, 0.99, 0.01, 0.9, 0.01},
                                  {0.2, 0.5, 0.5, 0.1, 0.8},
                                  {0.05, 0.3, 0.7, 0.3, 0.95}};
  int solved = 0, stalled = 0, dependent = 0, max_iter = 0;
  double max_gap = 0.0;
  std::string first_problem;
  auto check = [&](Tech tech, const ScenarioConfig& s) {
    try {
      const auto ref = solve_coupled(tech, s);
      max_iter = std::max(max_iter, ref.iterations);
      double gap = 0.0;
      for (const auto& init : starts) {
        CouplingOptions o;
        o.initial = init;
        const auto r = solve_coupled(tech, s, o);
        max_iter = std::max(max_iter, r.iterations);
        gap = std::max(gap, coupling_distance(r.state, ref.state));
      }
      max_gap = std::max(max_gap, gap);
      if (gap > kInitialGap) {
        ++dependent;
        if (first_problem.empty()) first_problem = fmt::format("{} N={} gap={:.2e}", to_string(tech), s.vehicles, gap);
      }
      ++solved;
    } catch (const ModelError& e) {
      ++stalled;
      if (first_problem.empty()) first_problem = fmt::format("{} N={}: {}", to_string(tech), s.vehicles, e.what());
    }
  };
  for (int n : kGridN) {
    for (int tc = 100; tc <= 1000; tc += 100) {
      for (int td : {100, 200, 300}) {
        for (int k : {1, 5, 9}) {
          for (double lambda : {0.2, 1.0}) {
            ScenarioConfig s = point(n);
            s.traffic.cam_interval = tc;
            s.traffic.denm_interval = td;
            s.traffic.denm_repetitions = k;
            s.traffic.denm_rate = lambda;
            // 802.11p does not depend on the C-V2X knobs.
            check(Tech::Dot11p, s);
            for (int g : kWindows) {
              for (double keep : {0.0, 0.4, 0.8}) {
                s.cv2x.selection_window = g;
                s.cv2x.keep_probability = keep;
                s.rc_bounds_explicit = false;
                resolve_rc_bounds(s);
                check(Tech::Cv2x, s);
              }
            }
          }
        }
      }
    }
  }
  verdict(2, stalled == 0 && dependent == 0,
          "coupled solve converges on the full grid, 5 initial conditions agree within 1e-7",
          fmt::format("points={} stalled={} ic_dependent={} max_ic_gap={:.2e} max_iterations={} time={:.1f}s{}", solved + stalled,
                      stalled, dependent, max_gap, max_iter, seconds_since(t0),
                      first_problem.empty() ? "" : " first: " + first_problem));
}

// ------------------------------------------------------------------ shared sweeps

struct Curves {
  std::map<int, std::vector<MetricsReport>> v2x;  // by window, over kGridN
  std::vector<MetricsReport> p11;                 // over kGridN
};

Curves default_curves() {
  Curves c;
  for (int n : kGridN) {
    c.p11.push_back(evaluate(Tech::Dot11p, point(n)));
    for (int g : kWindows) c.v2x[g].push_back(evaluate(Tech::Cv2x, point(n, g)));
  }
  return c;
}

std::vector<double> delays(const std::vector<MetricsReport>& rs) {
  std::vector<double> out;
  for (const auto& r : rs) out.push_back(r.delay_defined ? r.delay_ms : NAN);
  return out;
}

std::vector<double> collisions(const std::vector<MetricsReport>& rs) {
  std::vector<double> out;
  for (const auto& r : rs) out.push_back(r.collision);
  return out;
}

// ------------------------------------------------------------------ 3

void delay_trends(const Curves& c) {
  const auto d11 = delays(c.p11);
  bool below = true, flat = true, rising = true, by_window = true;
  std::vector<double> spreads;
  const auto d20 = delays(c.v2x.at(20));
  std::string misses;
  for (size_t i = 0; i < kGridN.size(); ++i) {
    if (!(d11[i] < d20[i])) {
      below = false;
      misses += fmt::format("N={}({:.3g}>={:.3g}) ", kGridN[i], d11[i], d20[i]);
    }
    if (i > 0 && !(d11[i] > d11[i - 1])) rising = false;
    if (!(delays(c.v2x.at(20))[i] < delays(c.v2x.at(50))[i] && delays(c.v2x.at(50))[i] < delays(c.v2x.at(100))[i])) {
      by_window = false;
    }
  }
  for (int g : kWindows) {
    const auto d = delays(c.v2x.at(g));
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    const double spread = (*hi - *lo) / *lo;
    spreads.push_back(spread);
    if (!(spread < kFlatDelay)) flat = false;
  }
  verdict(3, below && flat && rising && by_window,
          "delay trends: d11p < d_v2x(G=20); d_v2x flat (<5%) in N; d11p increasing in N; d_v2x increasing in G",
          fmt::format("[a] {}{} [b] spread G20/50/100={} {} [c] {} [d] {} | d11p_ms={} d_v2x_G20={} G50={} G100={}",
                      below ? "ok" : "FAIL ", misses, join(spreads, "{:.3f}"), flat ? "ok" : "FAIL",
                      rising ? "ok" : "FAIL", by_window ? "ok" : "FAIL", join(d11), join(d20),
                      join(delays(c.v2x.at(50))), join(delays(c.v2x.at(100)))));
}

// ------------------------------------------------------------------ 4

void collision_trends(const Curves& c) {
  const auto p11 = collisions(c.p11);
  const auto pv = collisions(c.v2x.at(100));
  bool below = true, mono = true, by_window = true;
  for (size_t i = 0; i < kGridN.size(); ++i) {
    if (!(pv[i] < p11[i])) below = false;
    if (i > 0 && (pv[i] < pv[i - 1] || p11[i] < p11[i - 1])) mono = false;
    const double a = c.v2x.at(20)[i].collision, b = c.v2x.at(50)[i].collision, d = c.v2x.at(100)[i].collision;
    if (!(a < b && b < d)) by_window = false;
  }
  verdict(4, below && mono && by_window,
          "collision trends: P_col_v2x < P_col_11p; both nondecreasing in N; P_col_v2x increasing in G",
          fmt::format("[a] {} [b] {} [c] {} | P11p={} Pv2x_G20={} G50={} G100={}", below ? "ok" : "FAIL",
                      mono ? "ok" : "FAIL", by_window ? "ok" : "FAIL", join(p11), join(collisions(c.v2x.at(20))),
                      join(collisions(c.v2x.at(50))), join(pv)));
}

// ------------------------------------------------------------------ 5

void utilization_anchor() {
  auto drop = [](Tech tech) {
    ScenarioConfig s = point(300);
    s.traffic.denm_rate = 1.0;
    s.traffic.denm_interval = 100;
    s.traffic.denm_repetitions = 5;
    s.cv2x.keep_probability = 0.4;
    const double fast = evaluate(tech, s).utilization;
    s.traffic.cam_interval = 1000;
    const double slow = evaluate(tech, s).utilization;
    return std::array{fast, slow, 100.0 * (fast - slow) / fast};
  };
  const auto p11 = drop(Tech::Dot11p), v2x = drop(Tech::Cv2x);
  const bool ok11 = std::abs(p11[2] - kCuDrop11p) <= kCuTolerancePp;
  const bool okv = std::abs(v2x[2] - kCuDropV2x) <= kCuTolerancePp;
  verdict(5, ok11 && okv, "CU drop from T_C=100 to 1000 ms at N=300: 11p 17.95%, C-V2X 2.80% (+-3 pp)",
          fmt::format("11p {:.2f}% ({:.4g}->{:.4g}) {}; C-V2X {:.2f}% ({:.4g}->{:.4g}) {}; Omega={} slots (AIFSN=6)",
                      p11[2], p11[0], p11[1], ok11 ? "ok" : "FAIL", v2x[2], v2x[0], v2x[1], okv ? "ok" : "FAIL",
                      Dot11pParams{}.aifs_slots()));
}

// ------------------------------------------------------------------ 6

void local_optimum() {
  std::vector<double> d;
  int best = 0;
  double best_d = INFINITY;
  for (int tc = 100; tc <= 1000; tc += 100) {
    ScenarioConfig s = point(50);
    s.traffic.denm_interval = 100;
    s.traffic.denm_repetitions = 9;
    s.traffic.denm_rate = 0.2;
    s.traffic.cam_interval = tc;
    d.push_back(evaluate(Tech::Cv2x, s).delay_ms);
    if (d.back() < best_d) {
      best_d = d.back();
      best = tc;
    }
  }
  verdict(6, best == kLocalOptimum, "argmin over T_C of d_v2x (T_D=100, K=9, lambda=0.2, G=100, N=50) is 300 ms",
          fmt::format("argmin={} ms; d_ms(T_C=100..1000)={}", best, join(d, "{:.2f}")));
}

// ------------------------------------------------------------------ 7

void delay_magnitudes(const Curves& c) {
  const auto d11 = delays(c.p11);
  bool fast = true, slow = true;
  std::string over;
  for (size_t i = 0; i < kGridN.size(); ++i) {
    if (!(d11[i] <= kMaxDelay11pMs)) {
      fast = false;
      over += fmt::format("N={}:{:.2f}ms ", kGridN[i], d11[i]);
    }
  }
  double min_v2x = INFINITY;
  for (int g : kWindows) {
    for (double d : delays(c.v2x.at(g))) min_v2x = std::min(min_v2x, d);
  }
  slow = min_v2x >= kMinDelayV2xMs;
  verdict(7, fast && slow, "d11p <= 5 ms for all grid N; d_v2x >= 10 ms for G >= 20",
          fmt::format("[a] {}{} [b] {} min d_v2x={:.2f} ms", fast ? "ok" : "FAIL ", over, slow ? "ok" : "FAIL",
                      min_v2x));
}

// ------------------------------------------------------------------ 8

void simulation_agreement() {
  const auto t0 = Clock::now();
  SimOptions o;
  o.seed = 1;
  o.duration_s = kSimSeconds;
  o.replications = kSimReplications;
  int agree = 0, total = 0;
  std::string detail;
  for (Tech tech : {Tech::Cv2x, Tech::Dot11p}) {
    for (int n : {10, 50, 100}) {
      const ScenarioConfig s = point(n);
      const auto an = evaluate(tech, s);
      const auto sim = run_sim(tech, s, o);
      auto one = [&](const char* name, double a, bool defined, const Estimate& e) {
        const bool ok = defined && within_tolerance(a, e.mean);
        ++total;
        if (ok) ++agree;
        detail += fmt::format(" {}:N={}:{} an={:.4g} sim={:.4g}+-{:.2g}{}", to_string(tech), n, name, a, e.mean, e.ci95,
                              ok ? "" : "*");
      };
      one("P_col", an.collision, true, sim.collision);
      one("d_ms", an.delay_ms, an.delay_defined, sim.delay_ms);
      one("CU", an.utilization, true, sim.utilization);
    }
  }
  verdict(8, agree == total,
          fmt::format("simulation within 15% (or 0.01 abs) of analytics, N in {{10,50,100}}, {} reps x {:g} s",
                      kSimReplications, kSimSeconds),
          fmt::format("agree {}/{} time={:.0f}s;{} (* = outside tolerance)", agree, total, seconds_since(t0),
                      detail));
}

// ------------------------------------------------------------------ 9

std::string solve_csv() {
  const auto config = parse_config("tech = both\nsweep.N = 50:300:50\nsweep.cv2x.gamma = 20,100\n");
  std::string out = std::string(kMetricsSchema) + "\n" + metrics_csv_header() + "\n";
  for (const auto& p : expand_sweep(config)) {
    for (Tech t : p.techs()) out += metrics_csv_row(t, p, evaluate(t, p)) + "\n";
  }
  return out;
}

std::string sim_csv(int jobs) {
  SimOptions o;
  o.seed = 7;
  o.duration_s = 10.0;
  o.replications = 4;
  o.jobs = jobs;
  std::string trace;
  o.trace = [&](const SimEvent& e) { trace += format_event(e) + "\n"; };
  std::string out = std::string(kSimSchema) + "\n" + sim_csv_header() + "\n";
  for (Tech t : {Tech::Cv2x, Tech::Dot11p}) {
    const ScenarioConfig s = point(30);
    out += sim_csv_row(t, s, run_sim(t, s, o)) + "\n";
  }
  return out + trace;
}

void determinism() {
  const auto a = solve_csv(), b = solve_csv();
  const auto s1 = sim_csv(1), s2 = sim_csv(1), s3 = sim_csv(4);
  verdict(9, a == b && s1 == s2 && s1 == s3, "repeated solver and seeded simulator runs are byte-identical",
          fmt::format("solve {} bytes {}; simulate+trace {} bytes {} (1 vs 4 workers {})", a.size(),
                      a == b ? "identical" : "DIFFER", s1.size(), s1 == s2 ? "identical" : "DIFFER",
                      s1 == s3 ? "identical" : "DIFFER"));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  oracle_equivalence();
  fixed_point_robustness();
  const Curves curves = default_curves();
  delay_trends(curves);
  collision_trends(curves);
  utilization_anchor();
  local_optimum();
  delay_magnitudes(curves);
  simulation_agreement();
  determinism();
  fmt::print("acceptance: {} of 9 criteria failed ({:.0f} s)\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}

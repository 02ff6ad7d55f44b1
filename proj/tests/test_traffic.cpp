#include <doctest.h>

#include <numeric>
#include <random>

#include "support.hpp"
#include "v2xmac/error.hpp"
#include "v2xmac/traffic.hpp"

using namespace v2xmac;
using testing::max_oracle_gap;

TEST_SUITE("traffic") {
  TEST_CASE("CAM always transmitting is a pure cycle") {
    const auto g = solve_cam(5, 1.0);
    CHECK(g.sent[0] == doctest::Approx(0.2).epsilon(1e-14));
    for (double p : g.pending) CHECK(p == 0.0);
    CHECK(g.total_mass() == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("CAM T=5, P_t=0.5 matches the oracle") {
    const auto g = solve_cam(5, 0.5);
    CHECK(std::abs(g.sent[0] - 0.193548) < 1e-6);
    CHECK(max_oracle_gap(g.flatten(), build_cam_chain(5, 0.5)) <= 1e-12);
  }

  TEST_CASE("CAM closed form equals the oracle across intervals and P_t") {
    for (int t : {2, 3, 100, 300, 1000}) {
      for (double p : {0.001, 0.01, 0.3, 0.9, 1.0}) {
        const auto g = solve_cam(t, p);
        CAPTURE(t);
        CAPTURE(p);
        CHECK(std::abs(g.total_mass() - 1.0) <= 1e-10);
        CHECK(max_oracle_gap(g.flatten(), build_cam_chain(t, p)) <= 1e-9);
      }
    }
  }

  TEST_CASE("blocked mass decreases with P_t") {
    const auto lo = solve_cam(100, 0.05), hi = solve_cam(100, 0.2);
    for (int j = 0; j < 100; ++j) CHECK(hi.pending[j] <= lo.pending[j]);
  }

  TEST_CASE("P_t = 0 is rejected") {
    CHECK_THROWS_AS(solve_cam(100, 0.0), ModelError);
    try {
      solve_denm(100, 5, 0.001, 0.0);
    } catch (const ModelError& e) {
      CHECK(e.code() == ErrorCode::DegenerateTransmitProbability);
    }
  }

  TEST_CASE("DENM with K=1 has no repetition mass") {
    const double p = -std::expm1(-0.001);
    const auto g = solve_denm(100, 1, p, 0.7);
    CHECK(g.sent[0] == doctest::Approx(1.0 / (1.0 + 1.0 / p)).epsilon(1e-14));
    CHECK(g.idle == doctest::Approx(1.0 - g.sent[0]).epsilon(1e-12));
    CHECK(max_oracle_gap(g.flatten(), build_denm_chain(100, 1, p, 0.7)) <= 1e-12);
  }

  TEST_CASE("DENM with immediate re-trigger alternates") {
    const auto g = solve_denm(100, 1, 1.0, 0.5);
    CHECK(g.sent[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(g.idle == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("DENM closed form equals the oracle") {
    TrafficParams t;
    t.denm_interval = 100;
    t.denm_repetitions = 5;
    t.denm_rate = 1.0;
    const auto g = solve_denm(t, 0.9);
    CHECK(max_oracle_gap(g.flatten(), build_denm_chain(100, 5, t.trigger_probability(), 0.9)) <= 1e-12);
    for (int td : {100, 200, 300}) {
      for (int k : {1, 5, 9}) {
        for (double rate : {0.2, 1.0}) {
          for (double p : {0.005, 0.4}) {
            const double q = -std::expm1(-rate * 0.001);
            CHECK(max_oracle_gap(solve_denm(td, k, q, p).flatten(), build_denm_chain(td, k, q, p)) <= 1e-9);
          }
        }
      }
    }
  }

  TEST_CASE("union rule") {
    CHECK(union_probability(0.0, 0.37) == 0.37);
    CHECK(union_probability(1.0, 1.0) == 1.0);
    CHECK(union_probability(0.5, 0.5) == 0.75);
  }

  TEST_CASE("disabled sources drop out of the combination") {
    TrafficParams t;
    t.cam_enabled = false;
    const auto denm = solve_denm(t, 0.2);
    const auto q = combine_transition_probs({}, denm, 0.2, t);
    CHECK(q.growth == denm.pending[0]);
    CHECK(q.arrival_when_empty == doctest::Approx(t.trigger_probability()));
  }

  TEST_CASE("combined transitions at the defaults") {
    // Generators at P_t = 0.01, the transitions derived from the oracle vectors.
    TrafficParams t;
    const double pt = 0.01;
    const auto cam = solve_steady_state(build_cam_chain(100, pt));
    const auto denm = solve_steady_state(build_denm_chain(100, 5, t.trigger_probability(), pt));
    double cam_drain = 0, denm_drain = 0;
    for (int j = 1; j < 100; ++j) {
      cam_drain += cam.probs[100 + j] * pt;
      denm_drain += denm.probs[100 + j] * pt;
    }
    const auto q = queue_transitions(t, pt);
    CHECK(q.growth == doctest::Approx(union_probability(cam.probs[100], denm.probs[100])).epsilon(1e-10));
    CHECK(q.first_arrival ==
          doctest::Approx(union_probability(cam.probs[0] * (1 - pt), denm.probs[0] * 0.8 * (1 - pt))).epsilon(1e-10));
    CHECK(q.drain == doctest::Approx(union_probability(cam_drain, denm_drain)).epsilon(1e-10));
    CHECK(q.arrival_when_empty ==
          doctest::Approx(union_probability(cam.probs[0], t.trigger_probability())).epsilon(1e-10));
  }

  TEST_CASE("queue without arrivals stays empty") {
    const auto q = solve_queue(0.2, 0.0, 0.5, 10);
    CHECK(q.empty == 1.0);
    CHECK(std::accumulate(q.probs.begin() + 1, q.probs.end(), 0.0) == 0.0);
  }

  TEST_CASE("queue matches the oracle") {
    const auto q = solve_queue(0.2, 0.3, 0.5, 10);
    CHECK(q.probs.size() == 11);
    CHECK(max_oracle_gap(q.probs, build_queue_chain(0.2, 0.3, 0.5, 10)) <= 1e-10);
  }

  TEST_CASE("queue at alpha = beta uses the analytic limit") {
    const auto q = solve_queue(0.3, 0.2, 0.3, 10);
    CHECK(q.empty == doctest::Approx(1.0 / (1.0 + 0.2 * 10 / 0.3)).epsilon(1e-14));
    CHECK(max_oracle_gap(q.probs, build_queue_chain(0.3, 0.2, 0.3, 10)) <= 1e-10);
    const auto near = solve_queue(0.3 + 1e-9, 0.2, 0.3, 10);
    CHECK(near.empty == doctest::Approx(q.empty).epsilon(1e-7));
  }

  TEST_CASE("geometric identity for random parameters") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int k = 0; k < 200; ++k) {
      const double a = u(rng), a1 = u(rng), b = u(rng);
      const int m = 1 + int(rng() % 20);
      if (std::abs(a - b) < 1e-3) continue;
      const auto q = solve_queue(a, a1, b, m);
      double series = 0.0;
      for (int i = 1; i <= m; ++i) series += q.empty * a1 * std::pow(a, i - 1) / std::pow(b, i);
      const double bracket = a1 * (1 - std::pow(a / b, m)) / (b - a);
      CHECK(std::abs(series - q.empty * bracket) <= 1e-12 * std::max(1.0, series));
      CHECK(std::abs(std::accumulate(q.probs.begin(), q.probs.end(), 0.0) - 1.0) <= 1e-10);
    }
  }

  TEST_CASE("queue that never drains") {
    try {
      solve_queue(0.1, 0.1, 0.0, 10);
      FAIL("expected DegenerateQueue");
    } catch (const ModelError& e) {
      CHECK(e.code() == ErrorCode::DegenerateQueue);
    }
  }

  TEST_CASE("P_qe monotone in lambda and P_t") {
    TrafficParams t;
    double prev = 2.0;
    for (double rate : {0.2, 0.5, 1.0, 2.0, 5.0}) {
      t.denm_rate = rate;
      const double e = solve_queue(queue_transitions(t, 0.05), t.queue_capacity).empty;
      CHECK(e <= prev + 1e-15);
      prev = e;
    }
    t.denm_rate = 1.0;
    prev = -1.0;
    for (double pt : {0.005, 0.01, 0.05, 0.1, 0.5, 1.0}) {
      const double e = solve_queue(queue_transitions(t, pt), t.queue_capacity).empty;
      CHECK(e >= prev - 1e-15);
      prev = e;
    }
  }
}

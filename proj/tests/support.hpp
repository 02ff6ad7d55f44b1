#pragma once

#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "v2xmac/chain_oracle.hpp"

namespace testing {

/// Largest |closed - oracle| over all states; the closed vector must be in
/// the oracle's enumeration order (checked by size).
inline double max_oracle_gap(const std::vector<double>& closed, const v2xmac::SteadyStateVector& oracle) {
  REQUIRE(closed.size() == oracle.probs.size());
  double gap = 0.0;
  for (size_t k = 0; k < closed.size(); ++k) gap = std::max(gap, std::abs(closed[k] - oracle.probs[k]));
  return gap;
}

inline double max_oracle_gap(const std::vector<double>& closed, const v2xmac::TransitionMatrix& m) {
  return max_oracle_gap(closed, v2xmac::solve_steady_state(m));
}

/// Monte-Carlo first-passage estimate: mean number of visited states from
/// `start` up to and including `target`.
inline double mean_passage(const v2xmac::TransitionMatrix& m, int start, int target, int walks, std::uint64_t seed) {
  const auto& rows = m.rows();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double total = 0.0;
  for (int w = 0; w < walks; ++w) {
    int s = start;
    long steps = 1;
    while (s != target) {
      double x = u(rng), acc = 0.0;
      int next = -1;
      for (v2xmac::TransitionMatrix::Storage::InnerIterator it(rows, s); it; ++it) {
        acc += it.value();
        next = static_cast<int>(it.col());
        if (x < acc) break;
      }
      s = next;
      ++steps;
    }
    total += static_cast<double>(steps);
  }
  return total / walks;
}

}  // namespace testing

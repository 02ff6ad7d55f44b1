#include "v2xmac/cv2x.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

#include "v2xmac/error.hpp"
#include "v2xmac/traffic.hpp"

namespace v2xmac {

double Cv2xSolution::total_mass() const {
  return idle + std::accumulate(waiting.begin(), waiting.end(), 0.0) +
         std::accumulate(counter.begin(), counter.end(), 0.0);
}

std::vector<double> Cv2xSolution::flatten() const {
  std::vector<double> out;
  out.reserve(1 + waiting.size() + counter.size());
  out.push_back(idle);
  out.insert(out.end(), waiting.begin(), waiting.end());
  out.insert(out.end(), counter.begin(), counter.end());
  return out;
}

Cv2xSolution solve_cv2x(const Cv2xParams& params, double queue_empty, double queue_nonempty,
                        double arrival_when_empty) {
  validate(params);
  if (!(queue_nonempty > 0.0)) {
    fail(ErrorCode::SaturatedQueue, fmt::format("P_qne = {} leaves the reservation states without a drain", queue_nonempty));
  }
  if (std::abs(queue_empty + queue_nonempty - 1.0) > 1e-12) {
    fail(ErrorCode::InvalidParameter, fmt::format("P_qe + P_qne = {} != 1", queue_empty + queue_nonempty));
  }
  if (!(arrival_when_empty >= 0.0 && arrival_when_empty <= 1.0)) {
    fail(ErrorCode::InvalidParameter, fmt::format("P_arr = {} outside [0, 1]", arrival_when_empty));
  }

  const int gamma = params.selection_window;
  const int lo = params.rc_low, hi = params.rc_high;
  const double g = gamma;
  const double keep = params.keep_probability, sched = params.schedule_probability;
  const double qne = queue_nonempty;

  const double start = union_probability(arrival_when_empty, qne) * sched;
  const double idle_ratio = (1.0 - keep) * (1.0 / sched - 1.0) / (arrival_when_empty + qne * (1.0 - arrival_when_empty));
  const double inv_w0 = idle_ratio + g / 2.0 * (start * idle_ratio + (1.0 - keep) * sched) + (g - 1.0) * keep +
                        g * (hi + lo) / (2.0 * qne) + 1.0 - g;
  const double w0 = 1.0 / inv_w0;
  const double per_draw = w0 / (hi - lo + 1);
  const double head = w0 / qne;  // mass of (1, 0)

  Cv2xSolution sol;
  sol.selection_window = gamma;
  sol.rc_high = hi;
  sol.idle = idle_ratio * w0;
  sol.waiting.resize(gamma - 1);
  for (int j = 0; j <= gamma - 2; ++j) {
    const double remaining = (g - 1.0 - j) / (g - 1.0);
    sol.waiting[j] = start * sol.idle * remaining + (remaining * (1.0 - keep) * sched + keep) * head * qne;
  }
  sol.counter.resize(static_cast<size_t>(hi) * gamma);
  for (int i = 1; i <= hi; ++i) {
    for (int j = 0; j < gamma; ++j) {
      double v;
      if (i < lo) {
        v = head;
      } else {
        v = (hi - i + 1) * per_draw / qne - (j == 0 ? 0.0 : per_draw);
      }
      sol.counter[(i - 1) * gamma + j] = v;
    }
  }
  for (int i = 1; i <= hi; ++i) sol.tx_opportunity += sol.at(i, 0);
  sol.transmit_probability = transmit_probability(sol, qne);

  const double mass = sol.total_mass();
  if (!std::isfinite(mass) || std::abs(mass - 1.0) > 1e-8) {
    fail(ErrorCode::InvalidMass, fmt::format("assembled C-V2X vector has mass {}", mass));
  }
  return sol;
}

double transmit_probability(const Cv2xSolution& sol, double queue_nonempty) {
  return sol.tx_opportunity * queue_nonempty;
}

}  // namespace v2xmac

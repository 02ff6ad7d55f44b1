#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "v2xmac/error.hpp"
#include "v2xmac/params.hpp"

namespace v2xmac {

/// Linking probabilities exchanged between the generator, queue and MAC
/// chains on every sweep.
struct CouplingState {
  double transmit = 0.01;           // P_t of the technology
  double queue_empty = 0.9;         // P_qe
  double queue_nonempty = 0.1;      // P_qne, always 1 - P_qe
  double arrival_when_empty = 0.0;  // P_arr
  double channel_busy = 0.1;        // theta; pinned to 0 for C-V2X
};

struct FixedPointReport {
  CouplingState state;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  int cam_interval = 0;  // T_C actually used (differs from config under adaptive CAM)
  std::vector<double> residual_trace;
};

using CamRatePolicy = std::function<int(double channel_busy, int base_interval)>;

struct CouplingOptions {
  double damping = 0.5;  // weight of the new value
  double tolerance = 1e-8;
  int max_iterations = 10000;
  CouplingState initial{};
  CamRatePolicy cam_policy;  // empty: adaptive_cam_rate
};

class NoFixedPointError : public ModelError {
 public:
  NoFixedPointError(const std::string& what, FixedPointReport report)
      : ModelError(ErrorCode::NoFixedPoint, what), report_(std::move(report)) {}
  const FixedPointReport& report() const { return report_; }

 private:
  FixedPointReport report_;
};

/// One undamped pass: generators -> queue transitions -> queue -> MAC chain
/// -> new transmit probability (and channel busy ratio for 802.11p).
CouplingState coupling_sweep(Tech tech, const ScenarioConfig& scenario, const CouplingState& current,
                             int cam_interval);

/// Max absolute difference over the linking probabilities.
double coupling_distance(const CouplingState& a, const CouplingState& b);

/// Iterates coupling_sweep with damping until the residual drops to the
/// tolerance. Throws NoFixedPointError (with the residual trace) otherwise.
FixedPointReport solve_coupled(Tech tech, const ScenarioConfig& scenario, const CouplingOptions& options = {});

/// Transmit-rate-control style CAM interval: base * (1 + 4 clamp((theta-0.3)/0.6)),
/// rounded to the 100 ms grid inside [100, 1000].
int adaptive_cam_rate(double channel_busy, int base_interval);

}  // namespace v2xmac

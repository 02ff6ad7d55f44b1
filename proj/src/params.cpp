#include "v2xmac/params.hpp"

#include <fmt/format.h>

#include "v2xmac/error.hpp"

namespace v2xmac {

std::string_view to_string(Tech tech) { return tech == Tech::Cv2x ? "cv2x" : "dot11p"; }

std::optional<RcBounds> standard_rc_bounds(int selection_window) {
  switch (selection_window) {
    case 100: return RcBounds{5, 15};
    case 50: return RcBounds{10, 30};
    case 20: return RcBounds{25, 75};
    default: return std::nullopt;
  }
}

std::vector<Tech> ScenarioConfig::techs() const {
  std::vector<Tech> out;
  if (run_cv2x) out.push_back(Tech::Cv2x);
  if (run_dot11p) out.push_back(Tech::Dot11p);
  return out;
}

namespace {

void require(bool ok, std::string_view field, std::string_view rule, double value) {
  if (!ok) fail(ErrorCode::InvalidParameter, fmt::format("{} = {} violates {}", field, value, rule));
}

}  // namespace

void validate(const TrafficParams& t) {
  require(t.cam_interval >= 100 && t.cam_interval <= 1000, "traffic.T_C", "the standard range [100, 1000] ms",
          t.cam_interval);
  require(t.denm_interval >= 1, "traffic.T_D", ">= 1", t.denm_interval);
  require(t.denm_repetitions >= 1 && t.denm_repetitions <= 9, "traffic.K", "[1, 9]", t.denm_repetitions);
  require(!t.denm_enabled || t.denm_rate > 0, "traffic.lambda", "> 0", t.denm_rate);
  require(t.trigger_window_s > 0, "traffic.T_tilde", "> 0", t.trigger_window_s);
  require(t.queue_capacity >= 1, "traffic.M", ">= 1", t.queue_capacity);
}

void validate(const Cv2xParams& c) {
  require(c.selection_window >= 2, "cv2x.gamma", ">= 2", c.selection_window);
  require(c.rc_low >= 1, "cv2x.R_l", ">= 1", c.rc_low);
  require(c.rc_high >= c.rc_low, "cv2x.R_h", ">= cv2x.R_l", c.rc_high);
  require(c.keep_probability >= 0 && c.keep_probability <= 0.8, "cv2x.P_rk", "the standard's range [0, 0.8]",
          c.keep_probability);
  require(c.schedule_probability > 0 && c.schedule_probability <= 1, "cv2x.P_sch", "(0, 1]",
          c.schedule_probability);
  require(c.csrs_per_subframe >= 1, "cv2x.csrs_per_subframe", ">= 1", c.csrs_per_subframe);
}

void validate(const Dot11pParams& d) {
  require(d.min_contention_window >= 3, "dot11p.C_min", ">= 3", d.min_contention_window);
  require(d.aifsn >= 1, "dot11p.AIFSN", ">= 1", d.aifsn);
  require(d.slot_time_us > 0, "dot11p.slot_us", "> 0", d.slot_time_us);
  require(d.sifs_time_us >= 0, "dot11p.sifs_us", ">= 0", d.sifs_time_us);
  require(d.tx_slots >= 1, "dot11p.vartheta", ">= 1", d.tx_slots);
  require(d.aifs_slots() >= 2, "dot11p.AIFSN", "an AIFS of at least 2 slots", d.aifsn);
}

void validate(const ScenarioConfig& c) {
  require(c.run_cv2x || c.run_dot11p, "tech", "at least one technology", 0);
  require(c.vehicles >= 1, "N", ">= 1", c.vehicles);
  validate(c.traffic);
  validate(c.cv2x);
  validate(c.dot11p);
}

void resolve_rc_bounds(ScenarioConfig& config) {
  if (config.rc_bounds_explicit) return;
  auto bounds = standard_rc_bounds(config.cv2x.selection_window);
  if (!bounds) {
    fail(ErrorCode::InvalidParameter,
         fmt::format("cv2x.gamma = {} is not a standard selection window; set cv2x.R_l and cv2x.R_h explicitly",
                     config.cv2x.selection_window));
  }
  config.cv2x.rc_low = bounds->low;
  config.cv2x.rc_high = bounds->high;
}

}  // namespace v2xmac

#pragma once

// Flat `key = value` scenario files. One assignment per line, `#` starts a
// comment. Keys:
//
//   tech                    cv2x | dot11p | both
//   N                       vehicles in range
//   adaptive_cam            0 | 1
//   traffic.T_C             CAM interval, ms (100..1000)
//   traffic.T_D             DENM repetition interval, ms
//   traffic.K               DENM generations per event (1..9)
//   traffic.lambda          DENM events per second
//   traffic.T_tilde         DENM trigger window, s
//   traffic.M               queue capacity
//   traffic.cam_enabled     0 | 1 (simulator)
//   traffic.denm_enabled    0 | 1
//   cv2x.gamma              selection window, subframes
//   cv2x.R_l, cv2x.R_h      resource counter bounds (default: standard pair for gamma)
//   cv2x.P_rk, cv2x.P_sch
//   cv2x.csrs_per_subframe
//   dot11p.C_min, dot11p.AIFSN, dot11p.slot_us, dot11p.sifs_us, dot11p.vartheta
//   sweep.<key>             from:to:step or v1,v2,... over any numeric key above;
//                           several sweeps form a Cartesian product in file order

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "v2xmac/error.hpp"
#include "v2xmac/params.hpp"

namespace v2xmac {

class ConfigError : public ModelError {
 public:
  ConfigError(std::string origin, int line, std::string field, const std::string& message);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

/// All recognised keys, in serialization order.
const std::vector<std::string>& config_keys();

/// Sets one field from its textual value. Throws ConfigError (line 0) on an
/// unknown key or a malformed value; does not validate ranges.
void set_field(ScenarioConfig& config, std::string_view key, std::string_view value);
std::string get_field(const ScenarioConfig& config, std::string_view key);

/// Parses, resolves default RC bounds and validates. Range violations are
/// reported as ConfigError naming the field and the line that set it.
ScenarioConfig parse_config(std::string_view text, std::string_view origin = "<config>");
ScenarioConfig load_config(const std::filesystem::path& path);

std::string serialize_config(const ScenarioConfig& config);

SweepAxis parse_sweep_axis(std::string_view key, std::string_view spec);

/// One validated scenario per sweep point (Cartesian product, first axis
/// slowest). Without sweeps, the config itself.
std::vector<ScenarioConfig> expand_sweep(const ScenarioConfig& config);

}  // namespace v2xmac

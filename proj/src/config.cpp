#include "v2xmac/config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace v2xmac {

ConfigError::ConfigError(std::string origin, int line, std::string field, const std::string& message)
    : ModelError(ErrorCode::ConfigParseError,
                 line > 0 ? fmt::format("{}:{}: {}: {}", origin, line, field, message)
                          : fmt::format("{}: {}: {}", origin, field, message)),
      line_(line),
      field_(std::move(field)) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("<field>", 0, std::string(key), fmt::format("'{}' is not {}", value, expected));
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, "a number");
  return out;
}

int to_int(std::string_view key, std::string_view v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec == std::errc() && p == v.data() + v.size()) return out;
  const double d = to_double(key, v);  // accept "50.0" from numeric sweeps
  if (d != std::floor(d) || std::abs(d) > 1e9) bad_value(key, v, "an integer");
  return static_cast<int>(d);
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  bad_value(key, v, "0/1");
}

struct Field {
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, std::string_view key, std::string_view)> set;
  bool numeric = true;
};

template <typename T>
Field int_field(T ScenarioConfig::*section, int T::*member) {
  return {[=](const ScenarioConfig& c) { return fmt::format("{}", c.*section.*member); },
          [=](ScenarioConfig& c, std::string_view k, std::string_view v) { c.*section.*member = to_int(k, v); }};
}

template <typename T>
Field real_field(T ScenarioConfig::*section, double T::*member) {
  return {[=](const ScenarioConfig& c) { return fmt::format("{}", c.*section.*member); },
          [=](ScenarioConfig& c, std::string_view k, std::string_view v) { c.*section.*member = to_double(k, v); }};
}

template <typename T>
Field bool_field(T ScenarioConfig::*section, bool T::*member) {
  return {[=](const ScenarioConfig& c) { return std::string(c.*section.*member ? "1" : "0"); },
          [=](ScenarioConfig& c, std::string_view k, std::string_view v) { c.*section.*member = to_bool(k, v); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    using S = ScenarioConfig;
    std::vector<std::pair<std::string, Field>> t;
    t.emplace_back("tech", Field{[](const S& c) -> std::string {
                                   if (c.run_cv2x && c.run_dot11p) return "both";
                                   return c.run_cv2x ? "cv2x" : "dot11p";
                                 },
                                 [](S& c, std::string_view k, std::string_view v) {
                                   if (v == "both") c.run_cv2x = c.run_dot11p = true;
                                   else if (v == "cv2x") c.run_cv2x = true, c.run_dot11p = false;
                                   else if (v == "dot11p") c.run_cv2x = false, c.run_dot11p = true;
                                   else bad_value(k, v, "one of cv2x, dot11p, both");
                                 },
                                 false});
    t.emplace_back("N", Field{[](const S& c) { return fmt::format("{}", c.vehicles); },
                              [](S& c, std::string_view k, std::string_view v) { c.vehicles = to_int(k, v); }});
    t.emplace_back("adaptive_cam", Field{[](const S& c) { return std::string(c.adaptive_cam ? "1" : "0"); },
                                         [](S& c, std::string_view k, std::string_view v) {
                                           c.adaptive_cam = to_bool(k, v);
                                         }});
    t.emplace_back("traffic.T_C", int_field(&S::traffic, &TrafficParams::cam_interval));
    t.emplace_back("traffic.T_D", int_field(&S::traffic, &TrafficParams::denm_interval));
    t.emplace_back("traffic.K", int_field(&S::traffic, &TrafficParams::denm_repetitions));
    t.emplace_back("traffic.lambda", real_field(&S::traffic, &TrafficParams::denm_rate));
    t.emplace_back("traffic.T_tilde", real_field(&S::traffic, &TrafficParams::trigger_window_s));
    t.emplace_back("traffic.M", int_field(&S::traffic, &TrafficParams::queue_capacity));
    t.emplace_back("traffic.cam_enabled", bool_field(&S::traffic, &TrafficParams::cam_enabled));
    t.emplace_back("traffic.denm_enabled", bool_field(&S::traffic, &TrafficParams::denm_enabled));
    t.emplace_back("cv2x.gamma", int_field(&S::cv2x, &Cv2xParams::selection_window));
    Field rl = int_field(&S::cv2x, &Cv2xParams::rc_low);
    Field rh = int_field(&S::cv2x, &Cv2xParams::rc_high);
    auto explicit_setter = [](auto inner) {
      return [inner](S& c, std::string_view k, std::string_view v) {
        inner(c, k, v);
        c.rc_bounds_explicit = true;
      };
    };
    rl.set = explicit_setter(rl.set);
    rh.set = explicit_setter(rh.set);
    t.emplace_back("cv2x.R_l", rl);
    t.emplace_back("cv2x.R_h", rh);
    t.emplace_back("cv2x.P_rk", real_field(&S::cv2x, &Cv2xParams::keep_probability));
    t.emplace_back("cv2x.P_sch", real_field(&S::cv2x, &Cv2xParams::schedule_probability));
    t.emplace_back("cv2x.csrs_per_subframe", int_field(&S::cv2x, &Cv2xParams::csrs_per_subframe));
    t.emplace_back("dot11p.C_min", int_field(&S::dot11p, &Dot11pParams::min_contention_window));
    t.emplace_back("dot11p.AIFSN", int_field(&S::dot11p, &Dot11pParams::aifsn));
    t.emplace_back("dot11p.slot_us", real_field(&S::dot11p, &Dot11pParams::slot_time_us));
    t.emplace_back("dot11p.sifs_us", real_field(&S::dot11p, &Dot11pParams::sifs_time_us));
    t.emplace_back("dot11p.vartheta", int_field(&S::dot11p, &Dot11pParams::tx_slots));
    return t;
  }();
  return table;
}

const Field& field(std::string_view key) {
  for (const auto& [name, f] : fields()) {
    if (name == key) return f;
  }
  throw ConfigError("<field>", 0, std::string(key), "unknown key");
}

// "cv2x.P_rk = 0.9 violates ..." -> "cv2x.P_rk"
std::string field_of(const std::string& message) {
  const auto colon = message.find(": ");
  const auto start = colon == std::string::npos ? 0 : colon + 2;
  const auto end = message.find(" = ", start);
  return end == std::string::npos ? std::string() : message.substr(start, end - start);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, f] : fields()) k.push_back(name);
    return k;
  }();
  return keys;
}

void set_field(ScenarioConfig& config, std::string_view key, std::string_view value) {
  field(key).set(config, key, value);
}

std::string get_field(const ScenarioConfig& config, std::string_view key) { return field(key).get(config); }

SweepAxis parse_sweep_axis(std::string_view key, std::string_view spec) {
  const Field& f = field(key);
  const std::string name = fmt::format("sweep.{}", key);
  if (!f.numeric) throw ConfigError("<field>", 0, name, "only numeric keys can be swept");
  SweepAxis axis;
  axis.parameter = std::string(key);
  axis.spec = std::string(trim(spec));
  const std::string_view s = axis.spec;
  if (s.find(':') != std::string_view::npos) {
    const auto a = s.find(':');
    const auto b = s.find(':', a + 1);
    if (b == std::string_view::npos || s.find(':', b + 1) != std::string_view::npos) {
      throw ConfigError("<field>", 0, name, fmt::format("'{}' is not from:to:step", s));
    }
    const double from = to_double(name, trim(s.substr(0, a)));
    const double to = to_double(name, trim(s.substr(a + 1, b - a - 1)));
    const double step = to_double(name, trim(s.substr(b + 1)));
    if (!(step > 0) || to < from) throw ConfigError("<field>", 0, name, "range needs step > 0 and from <= to");
    const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9)) + 1;
    if (count > 100000) throw ConfigError("<field>", 0, name, "range has more than 100000 points");
    for (long k = 0; k < count; ++k) axis.values.push_back(from + k * step);
  } else {
    size_t pos = 0;
    while (pos <= s.size()) {
      const auto comma = s.find(',', pos);
      const auto item = trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      axis.values.push_back(to_double(name, item));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  return axis;
}

std::vector<ScenarioConfig> expand_sweep(const ScenarioConfig& config) {
  std::vector<ScenarioConfig> points{config};
  points.front().sweep.clear();
  for (const auto& axis : config.sweep) {
    std::vector<ScenarioConfig> next;
    next.reserve(points.size() * axis.values.size());
    for (const auto& p : points) {
      for (double v : axis.values) {
        ScenarioConfig q = p;
        set_field(q, axis.parameter, fmt::format("{}", v));
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  for (auto& p : points) {
    resolve_rc_bounds(p);
    validate(p);
  }
  return points;
}

ScenarioConfig parse_config(std::string_view text, std::string_view origin) {
  const std::string where(origin);
  ScenarioConfig config;
  std::map<std::string, int> line_of;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where, line, std::string(s), "expected key = value");
    const std::string key(trim(s.substr(0, eq)));
    const std::string_view value = trim(s.substr(eq + 1));
    try {
      if (key.rfind("sweep.", 0) == 0) {
        const std::string target = key.substr(6);
        for (const auto& a : config.sweep) {
          if (a.parameter == target) throw ConfigError(where, line, key, "axis declared twice");
        }
        config.sweep.push_back(parse_sweep_axis(target, value));
      } else {
        set_field(config, key, value);
      }
    } catch (const ConfigError& e) {
      if (e.line() > 0) throw;
      std::string msg = e.what();
      const auto cut = msg.find(e.field() + ": ");
      throw ConfigError(where, line, key, cut == std::string::npos ? msg : msg.substr(cut + e.field().size() + 2));
    }
    line_of[key] = line;
  }

  try {
    resolve_rc_bounds(config);
    validate(config);
    expand_sweep(config);
  } catch (const ConfigError&) {
    throw;
  } catch (const ModelError& e) {
    std::string f = field_of(e.what());
    int at = 0;
    if (auto it = line_of.find(f); it != line_of.end()) at = it->second;
    if (auto it = line_of.find("sweep." + f); it != line_of.end()) at = it->second;
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    throw ConfigError(where, at, f.empty() ? "config" : f, colon == std::string::npos ? msg : msg.substr(colon + 2));
  }
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "file", "cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string serialize_config(const ScenarioConfig& config) {
  std::string out;
  for (const auto& [name, f] : fields()) {
    if ((name == "cv2x.R_l" || name == "cv2x.R_h") && !config.rc_bounds_explicit) continue;
    out += fmt::format("{} = {}\n", name, f.get(config));
  }
  for (const auto& axis : config.sweep) out += fmt::format("sweep.{} = {}\n", axis.parameter, axis.spec);
  return out;
}

}  // namespace v2xmac

#include "v2xmac/report.hpp"

#include <fmt/format.h>

#include <cmath>

namespace v2xmac {

std::string format_number(double v) {
  if (v == 0.0) return "0";  // no "-0"
  return fmt::format("{:.10g}", v);
}

namespace {

std::string scenario_columns(Tech tech, const ScenarioConfig& p, int cam_interval) {
  const bool v2x = tech == Tech::Cv2x;
  return fmt::format("{},{},{},{},{},{},{},{},{}", to_string(tech), p.vehicles,
                     v2x ? fmt::format("{}", p.cv2x.selection_window) : "", cam_interval, p.traffic.denm_interval,
                     p.traffic.denm_repetitions, format_number(p.traffic.denm_rate),
                     v2x ? format_number(p.cv2x.keep_probability) : "", v2x ? "" : fmt::format("{}", p.dot11p.aifsn));
}

constexpr std::string_view kScenarioHeader = "tech,N,Gamma,T_C,T_D,K,lambda,P_rk,AIFSN";

}  // namespace

std::string metrics_csv_header() {
  return fmt::format("{},theta,P_qe,P_t,P_txo,P_col,d_avg_ms,CU_avg,iterations,converged", kScenarioHeader);
}

std::string metrics_csv_row(Tech tech, const ScenarioConfig& point, const std::optional<MetricsReport>& report,
                            int iterations) {
  if (!report) {
    return fmt::format("{},,,,,,,,{},0", scenario_columns(tech, point, point.traffic.cam_interval), iterations);
  }
  const auto& r = *report;
  const bool v2x = tech == Tech::Cv2x;
  return fmt::format("{},{},{},{},{},{},{},{},{},{}", scenario_columns(tech, point, r.fixed_point.cam_interval),
                     v2x ? "" : format_number(r.theta), format_number(r.queue_empty), format_number(r.transmit),
                     v2x ? format_number(r.tx_opportunity) : "", format_number(r.collision),
                     r.delay_defined ? format_number(r.delay_ms) : "", format_number(r.utilization),
                     r.fixed_point.iterations, r.fixed_point.converged ? 1 : 0);
}

bool within_tolerance(double analytic, double simulated) {
  if (std::abs(analytic) < 0.01) return std::abs(simulated - analytic) <= 0.01;
  return std::abs(simulated - analytic) <= 0.15 * std::abs(analytic);
}

double relative_error(double analytic, double simulated) {
  if (analytic == 0.0) return simulated - analytic;
  return (simulated - analytic) / analytic;
}

std::string compare_csv_header() {
  return fmt::format(
      "{},P_col_an,P_col_sim,P_col_relerr,P_col_ci95,d_avg_an,d_avg_sim,d_avg_relerr,d_avg_ci95,"
      "CU_an,CU_sim,CU_relerr,CU_ci95,agree,unreliable",
      kScenarioHeader);
}

std::string compare_csv_row(Tech tech, const ScenarioConfig& point, const MetricsReport& an, const SimReport& sim) {
  auto block = [](double a, const Estimate& s, bool defined) {
    if (!defined) return fmt::format(",{},,{}", format_number(s.mean), format_number(s.ci95));
    return fmt::format("{},{},{},{}", format_number(a), format_number(s.mean), format_number(relative_error(a, s.mean)),
                       format_number(s.ci95));
  };
  const bool agree = within_tolerance(an.collision, sim.collision.mean) &&
                     (!an.delay_defined || within_tolerance(an.delay_ms, sim.delay_ms.mean)) &&
                     within_tolerance(an.utilization, sim.utilization.mean);
  return fmt::format("{},{},{},{},{},{}", scenario_columns(tech, point, an.fixed_point.cam_interval),
                     block(an.collision, sim.collision, true), block(an.delay_ms, sim.delay_ms, an.delay_defined),
                     block(an.utilization, sim.utilization, true), agree ? 1 : 0, sim.unreliable ? 1 : 0);
}

std::string sim_csv_header() {
  return fmt::format(
      "{},P_col,P_col_ci95,d_avg_ms,d_avg_ci95,CU_avg,CU_ci95,transmissions,drops,replications,seed,duration_s,"
      "unreliable,sensing",
      kScenarioHeader);
}

std::string sim_csv_row(Tech tech, const ScenarioConfig& point, const SimReport& s) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}", scenario_columns(tech, point, point.traffic.cam_interval),
                     format_number(s.collision.mean), format_number(s.collision.ci95), format_number(s.delay_ms.mean),
                     format_number(s.delay_ms.ci95), format_number(s.utilization.mean),
                     format_number(s.utilization.ci95), s.transmissions, s.drops, s.replications, s.seed,
                     format_number(s.duration_s), s.unreliable ? 1 : 0, s.sensing_model);
}

}  // namespace v2xmac

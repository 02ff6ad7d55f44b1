#pragma once

#include <optional>
#include <string>

#include "v2xmac/metrics.hpp"
#include "v2xmac/params.hpp"
#include "v2xmac/sim.hpp"

namespace v2xmac {

inline constexpr std::string_view kMetricsSchema = "# schema: v2xmac-metrics v1";
inline constexpr std::string_view kCompareSchema = "# schema: v2xmac-compare v1";
inline constexpr std::string_view kSimSchema = "# schema: v2xmac-sim v1";

std::string metrics_csv_header();

/// One row; a missing report (non-converged point) leaves the metric columns
/// empty and writes converged = 0.
std::string metrics_csv_row(Tech tech, const ScenarioConfig& point, const std::optional<MetricsReport>& report,
                            int iterations = 0);

/// Agreement rule of analytical vs simulated values: 15 % relative, or
/// 0.01 absolute where the analytical value is below 0.01.
bool within_tolerance(double analytic, double simulated);

/// Signed (sim - an) / an; 0 when both are 0 and (sim - an) when an is 0.
double relative_error(double analytic, double simulated);

std::string compare_csv_header();
std::string compare_csv_row(Tech tech, const ScenarioConfig& point, const MetricsReport& analytic, const SimReport& sim);

std::string sim_csv_header();
std::string sim_csv_row(Tech tech, const ScenarioConfig& point, const SimReport& sim);

/// Fixed formatting used for every floating-point CSV field.
std::string format_number(double v);

}  // namespace v2xmac

#include "v2xmac/recipes.hpp"

namespace v2xmac {

const std::vector<Recipe>& recipes() {
  static const std::vector<Recipe> all = {
      {"fig6a_delay_vs_N", R"(# Average delay vs N for both technologies, T_C in {100, 200} ms.
tech = both
traffic.T_D = 100
traffic.K = 5
traffic.lambda = 1
cv2x.P_rk = 0.4
sweep.traffic.T_C = 100,200
sweep.cv2x.gamma = 20,50,100
sweep.N = 50:300:50
)"},
      {"fig6b_theta_vs_N", R"(# 802.11p channel busy ratio vs N, fixed and adaptive CAM rate.
tech = dot11p
traffic.T_C = 100
traffic.T_D = 100
traffic.K = 5
traffic.lambda = 1
sweep.adaptive_cam = 0,1
sweep.N = 50:300:50
)"},
      {"fig7a_delay_vs_TC", R"(# Average delay vs CAM interval at N = 300.
tech = both
N = 300
traffic.T_D = 100
traffic.K = 5
traffic.lambda = 1
cv2x.P_rk = 0.4
sweep.cv2x.gamma = 20,50,100
sweep.traffic.T_C = 100:1000:100
)"},
      {"fig7b_local_optimum", R"(# C-V2X delay vs CAM interval for several DENM settings, N = 50, Gamma = 100.
tech = cv2x
N = 50
cv2x.gamma = 100
sweep.traffic.T_D = 100,200,300
sweep.traffic.K = 1,5,9
sweep.traffic.lambda = 0.2,1
sweep.cv2x.P_rk = 0,0.4,0.8
sweep.traffic.T_C = 100:1000:100
)"},
      {"fig8a_collision_vs_N", R"(# Collision probability vs N.
tech = both
traffic.T_C = 100
traffic.T_D = 100
traffic.K = 5
traffic.lambda = 1
cv2x.P_rk = 0.4
sweep.cv2x.gamma = 20,50,100
sweep.N = 50:300:50
)"},
      {"fig8b_utilization_vs_N", R"(# Average channel utilization vs N.
tech = both
traffic.T_C = 100
traffic.T_D = 100
traffic.K = 5
traffic.lambda = 1
cv2x.P_rk = 0.4
sweep.cv2x.gamma = 20,50,100
sweep.N = 50:300:50
)"},
  };
  return all;
}

const Recipe* find_recipe(std::string_view name) {
  for (const auto& r : recipes()) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

}  // namespace v2xmac

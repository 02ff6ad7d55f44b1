#pragma once

#include <string_view>
#include <vector>

namespace v2xmac {

struct Recipe {
  std::string_view name;
  std::string_view text;  // config file contents
};

/// Shipped sweep configurations for the delay, busy-ratio, collision and
/// utilization curves. The files under recipes/ are generated from these.
const std::vector<Recipe>& recipes();

const Recipe* find_recipe(std::string_view name);

}  // namespace v2xmac

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mfg/model.hpp"

namespace mfg {

struct EnvironmentEntry {
  std::string name;
  std::string description;
  nlohmann::ordered_json defaults;
};

/// The builtin environment families, in registry order.
const std::vector<EnvironmentEntry>& environment_registry();

/// Builds a registry environment with `params` merged over its defaults.
/// Unknown parameter keys are rejected.
FiniteMFG build_environment(const std::string& name, const nlohmann::json& params);

}  // namespace mfg

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mfg/fictitious_play.hpp"
#include "mfg/metrics.hpp"
#include "mfg/model.hpp"

namespace mfg {

/// Shortest-round-trip decimal formatting used in every CSV.
std::string format_double(Scalar v);

/// Writes through a temporary file and renames, so files appear exactly once.
void write_file_atomic(const std::string& path, const std::string& content);

/// DistributionFlow CSV: columns n, node_id, state, mass. Node ids are the
/// tree's depth-first indices.
std::string flow_csv(const FiniteMFG& model, const DistributionFlow& flow);

/// QTable CSV: columns n, node_id, state, action, q.
std::string qtable_csv(const FiniteMFG& model, const QTable& q);

/// Exploitability trace CSV: iteration, exploitability, wallclock_s, plus an
/// exploitability_proxy column when any trace point carries one.
std::string exploitability_csv(const std::vector<FPTracePoint>& trace);

nlohmann::ordered_json monotonicity_report_json(const MonotonicityReport& report);
nlohmann::ordered_json residual_report_json(const ResidualReport& report);

/// Builds a model from its JSON description: explicit fields (states, actions,
/// horizon or discount, mu0, transition, optional noise_tree, reward builtin)
/// or a registry reference {"env": name, "env_params": {...}}.
FiniteMFG model_from_json(const nlohmann::json& j);
FiniteMFG load_model_json(const std::string& path);

}  // namespace mfg

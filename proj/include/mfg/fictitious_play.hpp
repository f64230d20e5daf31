#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfg/metrics.hpp"
#include "mfg/model.hpp"

namespace mfg {

enum class BRBackend { ModelBased, ModelFree };
enum class DensityBackend { Exact, Empirical };

std::string to_string(BRBackend b);
std::string to_string(DensityBackend b);

struct FPConfig {
  int iterations = 100;
  BRBackend br_backend = BRBackend::ModelBased;
  DensityBackend density_backend = DensityBackend::Exact;
  int eval_every = 1;
  std::uint64_t seed = 0;
  int threads = 1;

  // Model-free knobs. episodes == 0 selects the default 10 * |X| * N per
  // fictitious-play iteration (N+1 steps of the game count as N here when
  // N >= 1; degenerate horizons use |X| episodes at minimum).
  int ql_episodes = 0;
  Scalar ql_alpha = 0.1;
  Scalar ql_epsilon = 0.2;
  bool ql_warm_start = true;
  int empirical_episodes = 0;

  // Exact tree-enumerated exploitability is the trace metric; larger trees are
  // rejected up front rather than silently approximated.
  int max_tree_nodes_exact = 100000;

  bool record_snapshots = false;  // keep mu_bar copies at the geometric cadence
  bool retain_flows = false;      // keep per-iteration BR flows (test hook)
  bool proxy_metric = false;      // also log the learned-BR exploitability proxy
};

/// Running tables for the flow-weighted policy average
///   pibar^j(a|x) = sum_i mu^{pi^i}(x) pi^i(a|x) / sum_i mu^{pi^i}(x),
/// maintained incrementally so no history is stored.
struct PolicyAverager {
  std::vector<std::vector<Matrix>> numerator;
  std::vector<std::vector<Vector>> denominator;

  void add(const DistributionFlow& flow, const PolicyFlow& policy);
  /// Flow-weighted average; rows with zero cumulative mass fall back to the
  /// uniform policy.
  PolicyFlow average() const;
};

/// One fictitious-play averaging update. Returns the new average policy after
/// folding (new_flow, new_policy) into the running tables.
PolicyFlow average_policy_update(PolicyAverager& tables, const DistributionFlow& new_flow,
                                 const PolicyFlow& new_policy);

struct FPState {
  int iteration = 0;         // j
  DistributionFlow mu_bar;   // average of best-response flows
  PolicyFlow pi_bar;         // flow-weighted average policy
  PolicyFlow last_br;        // pi^j (the initial policy at j = 0)
  PolicyAverager averager;
  std::string br_backend_id;
  std::string density_backend_id;
  std::uint64_t seed = 0;
  std::shared_ptr<QTable> learner_q;  // persists across iterations when warm-starting
  std::vector<DistributionFlow> retained_flows;  // only with FPConfig::retain_flows
};

/// Initial state: j = 0 with pi_0 (uniform by default), its induced flow as
/// mu_bar, and empty averaging tables.
FPState init_fp_state(const FiniteMFG& model, const FPConfig& cfg);
FPState init_fp_state(const FiniteMFG& model, const FPConfig& cfg, const PolicyFlow& initial_policy);

/// One fictitious-play iteration: j increments, pi^j best-responds to the
/// previous mu_bar, the flow average mixes with weights ((j-1)/j, 1/j) and the
/// policy average folds in the new flow-weighted term.
FPState fp_step(const FiniteMFG& model, FPState state, const FPConfig& cfg);

struct FPTracePoint {
  int iteration = 0;
  Scalar phi = 0;
  Scalar phi_raw = 0;
  Scalar value_gap_sup = 0;  // max_x of V^BR_0(x) - V^{pi_bar}_0(x); phi never exceeds it
  Scalar wallclock_s = 0;    // cumulative wall-clock when the point was logged
  std::optional<Scalar> phi_proxy;  // learned-BR proxy, when enabled
};

struct FPResult {
  PolicyFlow pi_bar;
  DistributionFlow mu_bar;
  std::vector<FPTracePoint> trace;
  std::vector<Scalar> iteration_seconds;
  std::vector<std::pair<int, DistributionFlow>> snapshots;
  std::string br_backend_id;
  std::string density_backend_id;
  std::uint64_t seed = 0;
  bool ql_warm_start = true;
};

/// Runs `cfg.iterations` fictitious-play steps, evaluating the exact
/// exploitability of pi_bar every `eval_every` iterations (plus the first and
/// last). The trace metric always uses the exact backend regardless of the
/// learning backends.
FPResult run_fp(const FiniteMFG& model, const FPConfig& cfg);

/// Snapshot cadence used for distribution logging: 1, 2, 5, 10, 20, 50, ...
/// capped at `max_iteration`.
std::vector<int> geometric_cadence(int max_iteration);

}  // namespace mfg

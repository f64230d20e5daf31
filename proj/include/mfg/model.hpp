#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfg/noise_tree.hpp"
#include "mfg/types.hpp"

namespace mfg {

enum class TimeMode { FiniteHorizon, Discounted };

/// Reward callback: given the population distribution seen at the current
/// (step, scenario) and a noise symbol, returns the |X| x |A| reward matrix.
/// Environments must be pure functions of (x, a, mu, symbol).
using RewardFn = std::function<Matrix(const Vector& mu, int symbol)>;

/// Monotone decomposition r(x,a,mu,xi) = tilde(x,a,xi) + bar(x,mu), exposed by
/// environments that declare the Lasry-Lions structure. `crowd` returns the
/// per-state vector bar(., mu).
struct MonotoneDecomposition {
  std::vector<Matrix> tilde;  // per symbol, |X| x |A|
  std::function<Vector(const Vector& mu)> crowd;
};

/// A finite mean field game: finite state/action sets, a scenario tree of
/// common-noise realizations, per-(action, symbol) transition kernels, a
/// population-coupled reward, and either a finite horizon or a discount.
struct FiniteMFG {
  int num_states = 0;
  int num_actions = 0;
  TimeMode mode = TimeMode::FiniteHorizon;
  int horizon = 0;       // valid in finite-horizon mode
  Scalar discount = 0;   // valid in discounted mode
  Vector mu0;
  NoiseTree noise_tree;
  // transition[symbol][action] is the |X| x |X| row-stochastic kernel.
  std::vector<std::vector<Kernel>> transition;
  RewardFn reward;
  std::optional<MonotoneDecomposition> monotone;
  std::string name;
  std::vector<std::string> build_warnings;

  bool finite_horizon() const { return mode == TimeMode::FiniteHorizon; }
  /// Number of decision steps (N+1 in finite-horizon mode, 1 in discounted).
  int num_steps() const { return finite_horizon() ? horizon + 1 : 1; }
  int nodes_at(int step) const { return static_cast<int>(noise_tree.level(step).size()); }

  Matrix reward_matrix(const Vector& mu, int symbol) const;
};

/// Time- and scenario-indexed stochastic policy pi_n(a|x, node). Discounted
/// models hold a single stationary slice.
struct PolicyFlow {
  // steps[n][slot] is |X| x |A| with rows summing to 1.
  std::vector<std::vector<Matrix>> steps;

  static PolicyFlow uniform(const FiniteMFG& model);
  static PolicyFlow zeros(const FiniteMFG& model);
};

/// Time- and scenario-indexed state distributions mu_n(.|node); in discounted
/// mode a single slice holding the gamma-occupancy measure.
struct DistributionFlow {
  // steps[n][slot] is a vector over states.
  std::vector<std::vector<Vector>> steps;
  // Filled by empirical estimation only: estimated[n][slot] == 0 marks a
  // scenario slice that no sampled episode visited.
  std::vector<std::vector<std::uint8_t>> estimated;

  static DistributionFlow zeros(const FiniteMFG& model);
  bool fully_estimated() const;
};

/// Action values Q_n(x, a | node) with the same indexing as PolicyFlow.
struct QTable {
  std::vector<std::vector<Matrix>> steps;

  static QTable zeros(const FiniteMFG& model);
};

/// Value table V_n(x|node) derived from a QTable under a policy.
Vector values_under_policy(const Matrix& q, const Matrix& policy);

struct Violation {
  std::string location;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<Violation> warnings;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

/// Checks every FiniteMFG / NoiseTree invariant; read-only and idempotent.
ValidationReport validate_mfg(const FiniteMFG& model);

/// Throws ShapeError unless the flow/policy shape matches the model's steps
/// and tree levels.
void check_policy_shape(const FiniteMFG& model, const PolicyFlow& policy);
void check_flow_shape(const FiniteMFG& model, const DistributionFlow& flow);

/// Throws on NaN or non-normalized policy rows (never repairs them).
void check_policy_rows(const PolicyFlow& policy);

}  // namespace mfg

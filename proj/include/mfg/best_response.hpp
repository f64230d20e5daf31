#pragma once

#include <cstdint>
#include <utility>

#include "mfg/model.hpp"

namespace mfg {

struct QLearningConfig {
  int episodes = 1;
  Scalar alpha = 0.1;    // learning rate
  Scalar epsilon = 0.2;  // epsilon-greedy exploration
  std::uint64_t rng_seed = 0;
  // Optional warm start: when set, learning continues from this table instead
  // of zeros. Shape-checked against the model.
  const QTable* warm_start = nullptr;
};

/// Exact best response against a fixed crowd flow by dynamic programming over
/// the scenario tree. Terminal values average the step-N reward over the
/// step's noise symbol; earlier steps recurse through
///   Q_n(x,a|node) = sum_edges P(xi|node) [ r(x,a,mu_n|node,xi)
///                   + sum_x' p(x'|x,a,xi) max_b Q_{n+1}(x',b|child) ].
/// The returned policy is greedy with ties broken toward the lowest action
/// index, so results are exactly reproducible.
std::pair<QTable, PolicyFlow> backward_induction(const FiniteMFG& model,
                                                 const DistributionFlow& mu, int threads = 1);

/// Tabular Q-learning against a fixed crowd flow. The transition kernel is
/// used only as a sampler. Single-threaded by design: the sequential update
/// order is part of the algorithm. Deterministic given cfg.rng_seed.
std::pair<QTable, PolicyFlow> q_learning(const FiniteMFG& model, const DistributionFlow& mu,
                                         const QLearningConfig& cfg);

/// Exact best response in the discounted regime: policy iteration with exact
/// policy evaluation (direct linear solve) and lowest-index greedy
/// improvement, run until the policy is stable.
PolicyFlow policy_iteration_discounted(const FiniteMFG& model, const DistributionFlow& mu);

/// Deterministic greedy extraction; ties resolve to the lowest action index.
PolicyFlow greedy_policy(const QTable& q);

/// Q-values of a *fixed* policy against a crowd flow (the evaluation
/// counterpart of backward_induction, with expectations under the policy in
/// place of the max). Finite-horizon models only.
QTable evaluate_policy(const FiniteMFG& model, const PolicyFlow& policy,
                       const DistributionFlow& mu, int threads = 1);

/// Value vector of a stationary policy in a discounted model: solves
/// (I - gamma P^pi) v = r^pi with the crowd flow fixed to `mu`.
Vector evaluate_policy_discounted(const FiniteMFG& model, const PolicyFlow& policy,
                                  const DistributionFlow& mu);

}  // namespace mfg

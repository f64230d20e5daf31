#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles are
// written as plain loops (or bit-for-bit mirrors where a test demands exact
// identity) and stay independent of the library code paths they check.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "mfg/distribution.hpp"
#include "mfg/model.hpp"
#include "mfg/rng.hpp"

namespace test_support {

using mfg::DistributionFlow;
using mfg::FiniteMFG;
using mfg::Kernel;
using mfg::Matrix;
using mfg::PolicyFlow;
using mfg::Scalar;
using mfg::Vector;

inline Kernel dense_to_kernel(const Matrix& dense) {
  std::vector<Eigen::Triplet<Scalar>> triplets;
  for (int x = 0; x < dense.rows(); ++x)
    for (int y = 0; y < dense.cols(); ++y)
      if (dense(x, y) != 0) triplets.emplace_back(x, y, dense(x, y));
  Kernel k(dense.rows(), dense.cols());
  k.setFromTriplets(triplets.begin(), triplets.end());
  k.makeCompressed();
  return k;
}

/// Finite-horizon model with a degenerate noise tree, per-action dense
/// kernels, and a mu-independent reward table.
inline FiniteMFG make_table_model(int horizon, const std::vector<Matrix>& kernels,
                                  const Vector& mu0, const Matrix& reward_table) {
  FiniteMFG model;
  model.name = "table";
  model.num_states = static_cast<int>(mu0.size());
  model.num_actions = static_cast<int>(reward_table.cols());
  model.mode = mfg::TimeMode::FiniteHorizon;
  model.horizon = horizon;
  model.mu0 = mu0;
  model.noise_tree = mfg::NoiseTree::degenerate(horizon + 1);
  std::vector<Kernel> per_action;
  for (const Matrix& k : kernels) per_action.push_back(dense_to_kernel(k));
  model.transition.push_back(std::move(per_action));
  model.reward = [reward_table](const Vector&, int) { return reward_table; };
  return model;
}

/// 2-state chain: both actions move deterministically to state 1 and stay.
inline FiniteMFG make_chain_model(int horizon = 2) {
  Matrix kernel(2, 2);
  kernel << 0, 1, 0, 1;
  Vector mu0(2);
  mu0 << 1, 0;
  Matrix reward(2, 2);
  reward << 1, 0, 0.5, 0.25;
  return make_table_model(horizon, {kernel, kernel}, mu0, reward);
}

/// Seeded random instance: Dirichlet(1) kernel rows, rewards in [0,1],
/// mu-independent. Small enough for exhaustive policy enumeration.
inline FiniteMFG make_random_model(std::uint64_t seed, int states, int actions, int horizon) {
  mfg::Rng rng(mfg::derive_seed(seed, "test-random-model"));
  auto dirichlet_row = [&](int size) {
    Vector row(size);
    Scalar sum = 0;
    for (int i = 0; i < size; ++i) {
      row(i) = -std::log(Scalar(1) - rng.next_uniform());
      sum += row(i);
    }
    return Vector(row / sum);
  };

  std::vector<Matrix> kernels;
  for (int a = 0; a < actions; ++a) {
    Matrix k(states, states);
    for (int x = 0; x < states; ++x) k.row(x) = dirichlet_row(states).transpose();
    kernels.push_back(std::move(k));
  }
  Matrix reward(states, actions);
  for (int x = 0; x < states; ++x)
    for (int a = 0; a < actions; ++a) reward(x, a) = rng.next_uniform();
  Vector mu0 = dirichlet_row(states);
  return make_table_model(horizon, kernels, mu0, reward);
}

/// 2-state monotone game: table reward plus the crowd term -mu(x).
inline FiniteMFG make_monotone_2state(int horizon = 3) {
  Matrix k0(2, 2), k1(2, 2);
  k0 << 0.9, 0.1, 0.2, 0.8;  // action 0
  k1 << 0.3, 0.7, 0.6, 0.4;  // action 1
  Vector mu0(2);
  mu0 << 0.5, 0.5;
  Matrix table(2, 2);
  table << 0.8, 0.1, 0.05, 0.6;
  FiniteMFG model = make_table_model(horizon, {k0, k1}, mu0, table);
  model.reward = [table](const Vector& mu, int) {
    Matrix r = table;
    r.colwise() -= mu;
    return r;
  };
  mfg::MonotoneDecomposition decomposition;
  decomposition.tilde.assign(1, table);
  decomposition.crowd = [](const Vector& mu) { return Vector(-mu); };
  model.monotone = std::move(decomposition);
  return model;
}

inline PolicyFlow deterministic_policy(const FiniteMFG& model, const std::vector<int>& action_at) {
  PolicyFlow pi = PolicyFlow::zeros(model);
  for (int n = 0; n < model.num_steps(); ++n)
    for (int x = 0; x < model.num_states; ++x)
      pi.steps[static_cast<std::size_t>(n)][0](
          x, action_at[static_cast<std::size_t>(n) * model.num_states + x]) = 1;
  return pi;
}

inline PolicyFlow random_stochastic_policy(const FiniteMFG& model, std::uint64_t seed) {
  mfg::Rng rng(mfg::derive_seed(seed, "test-random-policy"));
  PolicyFlow pi = PolicyFlow::zeros(model);
  for (auto& level : pi.steps)
    for (Matrix& slice : level)
      for (int x = 0; x < slice.rows(); ++x) {
        Scalar sum = 0;
        for (int a = 0; a < slice.cols(); ++a) {
          slice(x, a) = -std::log(Scalar(1) - rng.next_uniform());
          sum += slice(x, a);
        }
        slice.row(x) /= sum;
      }
  return pi;
}

// ---------------------------------------------------------------------------
// Plain-loop oracles (degenerate noise trees only).

inline int degenerate_symbol(const FiniteMFG& model, int step) {
  const auto& tree = model.noise_tree;
  const int node = tree.level(step)[0];
  return tree.node(tree.node(node).children[0]).symbol;
}

/// Forward-evaluated return of a stochastic policy against a crowd flow.
inline Scalar oracle_return(const FiniteMFG& model, const PolicyFlow& policy,
                            const DistributionFlow& crowd) {
  std::vector<Scalar> m(model.mu0.begin(), model.mu0.end());
  Scalar total = 0;
  for (int n = 0; n <= model.horizon; ++n) {
    const Matrix r =
        model.reward_matrix(crowd.steps[static_cast<std::size_t>(n)][0], degenerate_symbol(model, n));
    const Matrix& pi = policy.steps[static_cast<std::size_t>(n)][0];
    for (int x = 0; x < model.num_states; ++x)
      for (int a = 0; a < model.num_actions; ++a)
        total += m[static_cast<std::size_t>(x)] * pi(x, a) * r(x, a);
    if (n == model.horizon) break;
    std::vector<Scalar> next(static_cast<std::size_t>(model.num_states), 0);
    const auto& kernels = model.transition[0];
    for (int x = 0; x < model.num_states; ++x)
      for (int a = 0; a < model.num_actions; ++a) {
        const Scalar w = m[static_cast<std::size_t>(x)] * pi(x, a);
        if (w == 0) continue;
        for (Kernel::InnerIterator it(kernels[static_cast<std::size_t>(a)], x); it; ++it)
          next[static_cast<std::size_t>(it.col())] += w * it.value();
      }
    m = std::move(next);
  }
  return total;
}

/// Exhaustive max over deterministic policies of the return against `crowd`.
inline Scalar brute_force_best_return(const FiniteMFG& model, const DistributionFlow& crowd) {
  const int slots = model.num_steps() * model.num_states;
  std::vector<int> assign(static_cast<std::size_t>(slots), 0);
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  while (true) {
    best = std::max(best, oracle_return(model, deterministic_policy(model, assign), crowd));
    int i = 0;
    while (i < slots) {
      if (++assign[static_cast<std::size_t>(i)] < model.num_actions) break;
      assign[static_cast<std::size_t>(i)] = 0;
      ++i;
    }
    if (i == slots) break;
  }
  return best;
}

/// Monte Carlo return estimate with its standard error.
inline std::pair<Scalar, Scalar> mc_return(const FiniteMFG& model, const PolicyFlow& policy,
                                           const DistributionFlow& crowd, int episodes,
                                           std::uint64_t seed) {
  mfg::Rng rng(mfg::derive_seed(seed, "test-mc-return"));
  auto draw = [&](const auto& weights) {
    const Scalar u = rng.next_uniform();
    Scalar acc = 0;
    int last = 0;
    for (int i = 0; i < weights.size(); ++i) {
      acc += weights(i);
      last = i;
      if (u < acc) return i;
    }
    return last;
  };

  Scalar sum = 0, sum_sq = 0;
  for (int k = 0; k < episodes; ++k) {
    int x = draw(model.mu0);
    Scalar episode_return = 0;
    for (int n = 0; n <= model.horizon; ++n) {
      const Matrix r = model.reward_matrix(crowd.steps[static_cast<std::size_t>(n)][0],
                                           degenerate_symbol(model, n));
      const Matrix& pi = policy.steps[static_cast<std::size_t>(n)][0];
      const int a = draw(Vector(pi.row(x).transpose()));
      episode_return += r(x, a);
      if (n == model.horizon) break;
      const Kernel& kernel = model.transition[0][static_cast<std::size_t>(a)];
      const Scalar u = rng.next_uniform();
      Scalar acc = 0;
      int next = x;
      for (Kernel::InnerIterator it(kernel, x); it; ++it) {
        acc += it.value();
        next = static_cast<int>(it.col());
        if (u < acc) break;
      }
      x = next;
    }
    sum += episode_return;
    sum_sq += episode_return * episode_return;
  }
  const Scalar mean = sum / episodes;
  const Scalar variance = std::max<Scalar>(0, sum_sq / episodes - mean * mean);
  return {mean, std::sqrt(variance / episodes)};
}

// ---------------------------------------------------------------------------
// Dedicated no-common-noise implementations used for the unification checks:
// flat per-step arrays, no tree walk. Multiplying by the degenerate edge
// probability 1 and accumulating into zero are exact in IEEE arithmetic, so
// the tree path must reproduce these bit for bit.

inline DistributionFlow ref_propagate(const FiniteMFG& model, const PolicyFlow& policy) {
  DistributionFlow flow = DistributionFlow::zeros(model);
  flow.steps[0][0] = model.mu0;
  for (int n = 0; n < model.horizon; ++n) {
    const Vector& mu = flow.steps[static_cast<std::size_t>(n)][0];
    const Matrix& pi = policy.steps[static_cast<std::size_t>(n)][0];
    const auto& kernels = model.transition[static_cast<std::size_t>(degenerate_symbol(model, n))];
    Vector next = Vector::Zero(model.num_states);
    for (int a = 0; a < model.num_actions; ++a) {
      const Vector weighted = pi.col(a).cwiseProduct(mu);
      next += kernels[static_cast<std::size_t>(a)].transpose() * weighted;
    }
    flow.steps[static_cast<std::size_t>(n) + 1][0] = next;
  }
  return flow;
}

inline std::vector<Matrix> ref_backward_induction(const FiniteMFG& model,
                                                  const DistributionFlow& crowd) {
  std::vector<Matrix> q(static_cast<std::size_t>(model.num_steps()));
  Vector value_next;
  for (int n = model.horizon; n >= 0; --n) {
    const int symbol = degenerate_symbol(model, n);
    Matrix branch = model.reward_matrix(crowd.steps[static_cast<std::size_t>(n)][0], symbol);
    if (n < model.horizon) {
      const auto& kernels = model.transition[static_cast<std::size_t>(symbol)];
      for (int a = 0; a < model.num_actions; ++a)
        branch.col(a) += kernels[static_cast<std::size_t>(a)] * value_next;
    }
    value_next = branch.rowwise().maxCoeff();
    q[static_cast<std::size_t>(n)] = std::move(branch);
  }
  return q;
}

inline Scalar ref_return(const FiniteMFG& model, const PolicyFlow& policy,
                         const DistributionFlow& crowd, const DistributionFlow& marginal) {
  Scalar total = 0;
  for (int n = 0; n <= model.horizon; ++n) {
    const Matrix r = model.reward_matrix(crowd.steps[static_cast<std::size_t>(n)][0],
                                         degenerate_symbol(model, n));
    const Matrix& pi = policy.steps[static_cast<std::size_t>(n)][0];
    const Vector& m = marginal.steps[static_cast<std::size_t>(n)][0];
    total += m.dot((r.array() * pi.array()).rowwise().sum().matrix());
  }
  return total;
}

inline bool bit_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

inline bool bit_equal(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (int i = 0; i < a.size(); ++i)
    if (a(i) != b(i)) return false;
  return true;
}

inline Scalar max_abs_difference(const DistributionFlow& a, const DistributionFlow& b) {
  Scalar out = 0;
  for (std::size_t n = 0; n < a.steps.size(); ++n)
    for (std::size_t s = 0; s < a.steps[n].size(); ++s)
      out = std::max(out, (a.steps[n][s] - b.steps[n][s]).cwiseAbs().maxCoeff());
  return out;
}

inline Scalar max_abs_difference(const PolicyFlow& a, const PolicyFlow& b) {
  Scalar out = 0;
  for (std::size_t n = 0; n < a.steps.size(); ++n)
    for (std::size_t s = 0; s < a.steps[n].size(); ++s)
      out = std::max(out, (a.steps[n][s] - b.steps[n][s]).cwiseAbs().maxCoeff());
  return out;
}

}  // namespace test_support

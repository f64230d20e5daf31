#include "mfg/best_response.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mfg/distribution.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"

namespace mfg {

namespace {

template <typename Derived>
int argmax_lowest(const Eigen::MatrixBase<Derived>& row) {
  int best = 0;
  for (int a = 1; a < row.size(); ++a)
    if (row(a) > row(best)) best = a;
  return best;
}

// Shared backward pass; `optimal` selects the max-recursion (control) versus
// the expectation under `policy` (evaluation).
QTable backward_pass(const FiniteMFG& model, const DistributionFlow& mu,
                     const PolicyFlow* policy, int threads) {
  const NoiseTree& tree = model.noise_tree;
  QTable q = QTable::zeros(model);
  // Continuation values V_{n+1}(x|node) for the level below; terminal level 0.
  std::vector<Vector> value_below;

  for (int n = model.horizon; n >= 0; --n) {
    const auto& level = tree.level(n);
    std::vector<Vector> value_here(level.size());
    parallel_for(static_cast<int>(level.size()), threads, [&](int i) {
      const NoiseNode& node = tree.node(level[static_cast<std::size_t>(i)]);
      const Vector& mu_here =
          mu.steps[static_cast<std::size_t>(n)][static_cast<std::size_t>(node.slot)];
      Matrix q_here = Matrix::Zero(model.num_states, model.num_actions);
      for (int kid : node.children) {
        const NoiseNode& child = tree.node(kid);
        Matrix branch = model.reward_matrix(mu_here, child.symbol);
        if (n < model.horizon) {
          const Vector& v_next = value_below[static_cast<std::size_t>(child.slot)];
          const auto& kernels = model.transition[static_cast<std::size_t>(child.symbol)];
          for (int a = 0; a < model.num_actions; ++a)
            branch.col(a) += kernels[static_cast<std::size_t>(a)] * v_next;
        }
        q_here += child.edge_prob * branch;
      }
      if (policy) {
        const Matrix& pi =
            policy->steps[static_cast<std::size_t>(n)][static_cast<std::size_t>(node.slot)];
        value_here[static_cast<std::size_t>(i)] = values_under_policy(q_here, pi);
      } else {
        value_here[static_cast<std::size_t>(i)] = q_here.rowwise().maxCoeff();
      }
      q.steps[static_cast<std::size_t>(n)][static_cast<std::size_t>(node.slot)] = std::move(q_here);
    });
    value_below = std::move(value_here);
  }
  return q;
}

}  // namespace

std::pair<QTable, PolicyFlow> backward_induction(const FiniteMFG& model,
                                                 const DistributionFlow& mu, int threads) {
  if (!model.finite_horizon())
    throw ModeError("backward_induction requires a finite-horizon model "
                    "(use policy_iteration_discounted)");
  check_flow_shape(model, mu);
  QTable q = backward_pass(model, mu, nullptr, threads);
  PolicyFlow pi = greedy_policy(q);
  return {std::move(q), std::move(pi)};
}

QTable evaluate_policy(const FiniteMFG& model, const PolicyFlow& policy,
                       const DistributionFlow& mu, int threads) {
  if (!model.finite_horizon()) throw ModeError("evaluate_policy requires a finite-horizon model");
  check_flow_shape(model, mu);
  check_policy_shape(model, policy);
  return backward_pass(model, mu, &policy, threads);
}

PolicyFlow greedy_policy(const QTable& q) {
  PolicyFlow pi;
  pi.steps.resize(q.steps.size());
  for (std::size_t n = 0; n < q.steps.size(); ++n) {
    pi.steps[n].reserve(q.steps[n].size());
    for (const Matrix& slice : q.steps[n]) {
      Matrix greedy = Matrix::Zero(slice.rows(), slice.cols());
      for (int x = 0; x < slice.rows(); ++x) greedy(x, argmax_lowest(slice.row(x))) = 1;
      pi.steps[n].push_back(std::move(greedy));
    }
  }
  return pi;
}

std::pair<QTable, PolicyFlow> q_learning(const FiniteMFG& model, const DistributionFlow& mu,
                                         const QLearningConfig& cfg) {
  if (!model.finite_horizon()) throw ModeError("q_learning requires a finite-horizon model");
  if (cfg.episodes < 1) throw std::invalid_argument("q_learning: episodes must be >= 1");
  if (!(cfg.alpha > 0 && cfg.alpha <= 1))
    throw std::invalid_argument("q_learning: alpha must lie in (0,1]");
  if (cfg.epsilon < 0 || cfg.epsilon > 1)
    throw std::invalid_argument("q_learning: epsilon must lie in [0,1]");
  check_flow_shape(model, mu);

  const NoiseTree& tree = model.noise_tree;
  QTable q = QTable::zeros(model);
  if (cfg.warm_start) {
    q = *cfg.warm_start;
    if (static_cast<int>(q.steps.size()) != model.num_steps())
      throw ShapeError("q_learning: warm-start table shape mismatch");
  }

  // The kernels act as a black-box simulator here: rows are only sampled.
  struct Edge {
    int child;
    int symbol;
    Scalar prob;
  };
  std::vector<std::vector<Edge>> edges(static_cast<std::size_t>(tree.num_nodes()));
  for (const NoiseNode& node : tree.nodes())
    for (int kid : node.children)
      edges[static_cast<std::size_t>(node.id)].push_back(
          {kid, tree.node(kid).symbol, tree.node(kid).edge_prob});

  Rng rng(derive_seed(cfg.rng_seed, "q-learning"));
  for (int episode = 0; episode < cfg.episodes; ++episode) {
    int x = rng.next_categorical(model.mu0);
    int node_id = 0;
    for (int n = 0; n <= model.horizon; ++n) {
      const NoiseNode& node = tree.node(node_id);
      Matrix& q_here = q.steps[static_cast<std::size_t>(n)][static_cast<std::size_t>(node.slot)];

      int a;
      if (rng.next_uniform() < cfg.epsilon) {
        a = rng.next_below(model.num_actions);
      } else {
        a = argmax_lowest(q_here.row(x));
      }

      // Realize the step's common noise by walking one tree edge.
      const auto& out = edges[static_cast<std::size_t>(node_id)];
      const Scalar u_edge = rng.next_uniform();
      Scalar acc = 0;
      const Edge* picked = &out.back();
      for (const Edge& e : out) {
        acc += e.prob;
        if (u_edge < acc) {
          picked = &e;
          break;
        }
      }

      const Vector& mu_here =
          mu.steps[static_cast<std::size_t>(n)][static_cast<std::size_t>(node.slot)];
      const Scalar reward = model.reward_matrix(mu_here, picked->symbol)(x, a);

      Scalar target = reward;
      int x_next = x;
      if (n < model.horizon) {
        const Kernel& k = model.transition[static_cast<std::size_t>(picked->symbol)]
                                          [static_cast<std::size_t>(a)];
        const Scalar u = rng.next_uniform();
        Scalar cum = 0;
        x_next = x;
        for (Kernel::InnerIterator it(k, x); it; ++it) {
          cum += it.value();
          x_next = static_cast<int>(it.col());
          if (u < cum) break;
        }
        const Matrix& q_next = q.steps[static_cast<std::size_t>(n + 1)]
                                      [static_cast<std::size_t>(tree.node(picked->child).slot)];
        target += q_next.row(x_next).maxCoeff();
      }
      q_here(x, a) = (1 - cfg.alpha) * q_here(x, a) + cfg.alpha * target;

      x = x_next;
      node_id = picked->child;
    }
  }
  PolicyFlow pi = greedy_policy(q);
  return {std::move(q), std::move(pi)};
}

Vector evaluate_policy_discounted(const FiniteMFG& model, const PolicyFlow& policy,
                                  const DistributionFlow& mu) {
  if (model.finite_horizon())
    throw ModeError("evaluate_policy_discounted requires a discounted model");
  check_policy_shape(model, policy);
  check_flow_shape(model, mu);

  const Matrix& pi = policy.steps[0][0];
  const Matrix rewards = model.reward_matrix(mu.steps[0][0], 0);
  const Vector r_pi = (rewards.array() * pi.array()).rowwise().sum();
  const Matrix p_pi = policy_kernel(model, pi, 0);
  const Matrix system = Matrix::Identity(model.num_states, model.num_states) - model.discount * p_pi;
  return system.partialPivLu().solve(r_pi);
}

PolicyFlow policy_iteration_discounted(const FiniteMFG& model, const DistributionFlow& mu) {
  if (model.finite_horizon())
    throw ModeError("policy_iteration_discounted requires a discounted model "
                    "(use backward_induction)");
  if (!model.noise_tree.is_degenerate())
    throw ModeError("policy_iteration_discounted does not support common noise");
  check_flow_shape(model, mu);

  const Matrix rewards = model.reward_matrix(mu.steps[0][0], 0);
  const auto& kernels = model.transition[0];

  PolicyFlow policy = PolicyFlow::zeros(model);
  for (int x = 0; x < model.num_states; ++x) policy.steps[0][0](x, 0) = 1;

  for (int sweep = 0; sweep < 10000; ++sweep) {
    const Vector v = evaluate_policy_discounted(model, policy, mu);

    Matrix q(model.num_states, model.num_actions);
    for (int a = 0; a < model.num_actions; ++a)
      q.col(a) = rewards.col(a) + model.discount * (kernels[static_cast<std::size_t>(a)] * v);

    Matrix improved = Matrix::Zero(model.num_states, model.num_actions);
    for (int x = 0; x < model.num_states; ++x) improved(x, argmax_lowest(q.row(x))) = 1;

    if (improved == policy.steps[0][0]) return policy;
    policy.steps[0][0] = std::move(improved);
  }
  throw std::runtime_error("policy_iteration_discounted failed to stabilize");
}

}  // namespace mfg

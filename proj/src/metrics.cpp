#include "mfg/metrics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mfg/best_response.hpp"
#include "mfg/distribution.hpp"
#include "mfg/rng.hpp"

namespace mfg {

namespace {

// Forward-accumulated return of `policy` whose own marginal is `marginal`,
// rewarded against the crowd flow `crowd`. Per-edge contributions are kept so
// callers can roll them up per scenario.
struct ForwardReturn {
  Scalar total = 0;
  // contribution[child node id] = conditional expected reward collected on the
  // edge into that node, i.e. at step depth(child)-1 under its symbol.
  std::vector<Scalar> edge_contribution;
};

ForwardReturn forward_return(const FiniteMFG& model, const PolicyFlow& policy,
                             const DistributionFlow& crowd, const DistributionFlow& marginal) {
  const NoiseTree& tree = model.noise_tree;
  ForwardReturn out;
  out.edge_contribution.assign(static_cast<std::size_t>(tree.num_nodes()), 0);
  for (int n = 0; n <= model.horizon; ++n) {
    for (int id : tree.level(n)) {
      const NoiseNode& node = tree.node(id);
      const Vector& mu =
          crowd.steps[static_cast<std::size_t>(n)][static_cast<std::size_t>(node.slot)];
      const Vector& m =
          marginal.steps[static_cast<std::size_t>(n)][static_cast<std::size_t>(node.slot)];
      const Matrix& pi =
          policy.steps[static_cast<std::size_t>(n)][static_cast<std::size_t>(node.slot)];
      for (int kid : node.children) {
        const NoiseNode& child = tree.node(kid);
        const Matrix r = model.reward_matrix(mu, child.symbol);
        const Scalar step_reward = m.dot((r.array() * pi.array()).rowwise().sum().matrix());
        out.edge_contribution[static_cast<std::size_t>(kid)] = step_reward;
        out.total += node.prob * child.edge_prob * step_reward;
      }
    }
  }
  return out;
}

// Conditional return along every root-to-leaf path, accumulated by DFS.
std::vector<Scalar> per_leaf_returns(const NoiseTree& tree, const std::vector<Scalar>& edge) {
  std::vector<Scalar> acc(static_cast<std::size_t>(tree.num_nodes()), 0);
  std::vector<Scalar> leaf(tree.level(tree.depth()).size(), 0);
  for (const NoiseNode& node : tree.nodes()) {
    if (node.parent >= 0)
      acc[static_cast<std::size_t>(node.id)] =
          acc[static_cast<std::size_t>(node.parent)] + edge[static_cast<std::size_t>(node.id)];
    if (node.depth == tree.depth())
      leaf[static_cast<std::size_t>(node.slot)] = acc[static_cast<std::size_t>(node.id)];
  }
  return leaf;
}

Scalar discounted_return(const FiniteMFG& model, const PolicyFlow& policy,
                         const DistributionFlow& crowd) {
  check_policy_shape(model, policy);
  check_flow_shape(model, crowd);
  const DistributionFlow occ = occupancy_measure(model, policy);
  const Matrix r = model.reward_matrix(crowd.steps[0][0], 0);
  const Vector r_pi = (r.array() * policy.steps[0][0].array()).rowwise().sum();
  return occ.steps[0][0].dot(r_pi);
}

}  // namespace

Scalar evaluate_return(const FiniteMFG& model, const PolicyFlow& policy,
                       const DistributionFlow& mu, int threads) {
  if (!model.finite_horizon()) return discounted_return(model, policy, mu);
  check_flow_shape(model, mu);
  const DistributionFlow marginal = propagate_exact(model, policy, threads);
  return forward_return(model, policy, mu, marginal).total;
}

TraceEvaluation exploitability_with_value_gap(const FiniteMFG& model, const PolicyFlow& policy,
                                              int threads) {
  TraceEvaluation eval;
  ExploitabilityReport& report = eval.report;
  if (model.finite_horizon()) {
    const DistributionFlow flow = propagate_exact(model, policy, threads);
    auto [q_star, br] = backward_induction(model, flow, threads);
    const Vector v0 = q_star.steps[0][0].rowwise().maxCoeff();
    report.j_best = model.mu0.dot(v0);

    const ForwardReturn own = forward_return(model, policy, flow, flow);
    report.j_policy = own.total;

    const QTable q_policy = evaluate_policy(model, policy, flow, threads);
    const Vector v0_policy = values_under_policy(q_policy.steps[0][0], policy.steps[0][0]);
    eval.value_gap_sup = (v0 - v0_policy).maxCoeff();

    if (!model.noise_tree.is_degenerate()) {
      const DistributionFlow br_flow = propagate_exact(model, br, threads);
      const ForwardReturn best = forward_return(model, br, flow, br_flow);
      const auto policy_leaf = per_leaf_returns(model.noise_tree, own.edge_contribution);
      const auto best_leaf = per_leaf_returns(model.noise_tree, best.edge_contribution);
      const auto& leaves = model.noise_tree.level(model.noise_tree.depth());
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        const NoiseNode& leaf = model.noise_tree.node(leaves[i]);
        report.per_scenario.push_back({leaf.id, leaf.prob, policy_leaf[i], best_leaf[i]});
      }
    }
  } else {
    const DistributionFlow occ = occupancy_measure(model, policy);
    const PolicyFlow br = policy_iteration_discounted(model, occ);
    const Vector v_br = evaluate_policy_discounted(model, br, occ);
    const Vector v_policy = evaluate_policy_discounted(model, policy, occ);
    report.j_best = model.mu0.dot(v_br);
    report.j_policy = discounted_return(model, policy, occ);
    eval.value_gap_sup = (v_br - v_policy).maxCoeff();
  }

  report.phi_raw = report.j_best - report.j_policy;
  if (report.phi_raw < kExploitabilityFloor)
    throw std::runtime_error("exploitability: best response fell below the evaluated policy by " +
                             std::to_string(-report.phi_raw));
  report.phi = report.phi_raw < 0 ? 0 : report.phi_raw;
  return eval;
}

ExploitabilityReport exploitability(const FiniteMFG& model, const PolicyFlow& policy,
                                    int threads) {
  return exploitability_with_value_gap(model, policy, threads).report;
}

MonotonicityReport monotonicity_check(const FiniteMFG& model, int trials, std::uint64_t rng_seed,
                                      Scalar tolerance) {
  if (!model.monotone)
    throw std::invalid_argument("monotonicity_check: model declares no monotone decomposition");
  if (trials < 1) throw std::invalid_argument("monotonicity_check: trials must be >= 1");

  MonotonicityReport report;
  report.trials = trials;
  report.tolerance = tolerance;
  report.max_value = -std::numeric_limits<Scalar>::infinity();

  Rng rng(derive_seed(rng_seed, "monotonicity"));
  auto sample_simplex = [&](Vector& out) {
    Scalar sum = 0;
    for (int x = 0; x < model.num_states; ++x) {
      out(x) = -std::log(Scalar(1) - rng.next_uniform());
      sum += out(x);
    }
    out /= sum;
  };

  Vector mu(model.num_states), mu_prime(model.num_states);
  for (int t = 0; t < trials; ++t) {
    sample_simplex(mu);
    sample_simplex(mu_prime);
    const Vector diff_r = model.monotone->crowd(mu) - model.monotone->crowd(mu_prime);
    const Scalar value = (mu - mu_prime).dot(diff_r);
    if (value > report.max_value) {
      report.max_value = value;
      report.argmax_trial = t;
      report.witness_mu = mu;
      report.witness_mu_prime = mu_prime;
    }
  }
  report.violated = report.max_value > tolerance;
  return report;
}

ResidualReport fixed_point_residual(const FiniteMFG& model, const std::vector<Vector>& value,
                                    const DistributionFlow& mu) {
  if (!model.finite_horizon())
    throw ModeError("fixed_point_residual requires a finite-horizon model");
  if (!model.noise_tree.is_degenerate())
    throw ModeError("fixed_point_residual does not support common noise");
  check_flow_shape(model, mu);
  if (static_cast<int>(value.size()) != model.num_steps())
    throw ShapeError("fixed_point_residual: one value vector per step required");

  ResidualReport report;
  report.residual.resize(value.size());
  const NoiseTree& tree = model.noise_tree;
  for (int n = model.horizon; n >= 0; --n) {
    const NoiseNode& node = tree.node(tree.level(n)[0]);
    const int symbol = tree.node(node.children[0]).symbol;
    Matrix q = model.reward_matrix(mu.steps[static_cast<std::size_t>(n)][0], symbol);
    if (n < model.horizon) {
      const auto& kernels = model.transition[static_cast<std::size_t>(symbol)];
      for (int a = 0; a < model.num_actions; ++a)
        q.col(a) += kernels[static_cast<std::size_t>(a)] * value[static_cast<std::size_t>(n) + 1];
    }
    report.residual[static_cast<std::size_t>(n)] =
        value[static_cast<std::size_t>(n)] - q.rowwise().maxCoeff();
  }

  report.sup_norm = 0;
  report.weighted_norm = 0;
  for (int n = 0; n <= model.horizon; ++n) {
    const Vector& res = report.residual[static_cast<std::size_t>(n)];
    report.weighted_norm += mu.steps[static_cast<std::size_t>(n)][0].dot(res.cwiseAbs());
    for (int x = 0; x < model.num_states; ++x) {
      if (std::abs(res(x)) > report.sup_norm) {
        report.sup_norm = std::abs(res(x));
        report.argmax_step = n;
        report.argmax_state = x;
      }
    }
  }
  return report;
}

RateFit rate_fit(const std::vector<std::pair<int, Scalar>>& trace, int min_iteration,
                 int max_iteration) {
  int positive = 0;
  for (const auto& [j, phi] : trace)
    if (phi > 0) ++positive;
  if (positive < 10)
    throw std::invalid_argument("rate_fit: need at least 10 trace points with phi > 0");

  std::vector<std::pair<Scalar, Scalar>> pts;
  for (const auto& [j, phi] : trace) {
    if (j < min_iteration || j > max_iteration) continue;
    if (phi <= 0) continue;  // dropped, not an error
    pts.emplace_back(std::log(Scalar(j)), std::log(phi));
  }
  if (pts.size() < 5)
    throw std::invalid_argument("rate_fit: fewer than 5 usable points in the fit window");

  const auto n = static_cast<Scalar>(pts.size());
  Scalar sx = 0, sy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
  }
  const Scalar mx = sx / n, my = sy / n;
  Scalar sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0 ? 1 : (sxy * sxy) / (sxx * syy);
  fit.points_used = static_cast<int>(pts.size());
  return fit;
}

std::vector<Vector> optimal_values(const QTable& q) {
  std::vector<Vector> v;
  v.reserve(q.steps.size());
  for (const auto& level : q.steps) {
    if (level.size() != 1)
      throw ShapeError("optimal_values expects a degenerate-tree QTable");
    v.push_back(level[0].rowwise().maxCoeff());
  }
  return v;
}

}  // namespace mfg

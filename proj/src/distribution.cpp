#include "mfg/distribution.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"

namespace mfg {

Matrix policy_kernel(const FiniteMFG& model, const Matrix& policy_slice, int symbol) {
  Matrix out = Matrix::Zero(model.num_states, model.num_states);
  const auto& kernels = model.transition[static_cast<std::size_t>(symbol)];
  for (int a = 0; a < model.num_actions; ++a) {
    const Kernel& k = kernels[static_cast<std::size_t>(a)];
    for (int x = 0; x < k.outerSize(); ++x)
      for (Kernel::InnerIterator it(k, x); it; ++it)
        out(x, it.col()) += policy_slice(x, a) * it.value();
  }
  return out;
}

DistributionFlow propagate_exact(const FiniteMFG& model, const PolicyFlow& policy, int threads) {
  if (!model.finite_horizon())
    throw ModeError("propagate_exact requires a finite-horizon model (use occupancy_measure)");
  check_policy_shape(model, policy);
  check_policy_rows(policy);

  const NoiseTree& tree = model.noise_tree;
  DistributionFlow flow = DistributionFlow::zeros(model);
  flow.steps[0][0] = model.mu0;

  for (int n = 0; n + 1 <= model.horizon; ++n) {
    const auto& next_level = tree.level(n + 1);
    parallel_for(static_cast<int>(next_level.size()), threads, [&](int i) {
      const NoiseNode& child = tree.node(next_level[static_cast<std::size_t>(i)]);
      const NoiseNode& parent = tree.node(child.parent);
      const Vector& mu = flow.steps[static_cast<std::size_t>(n)][static_cast<std::size_t>(parent.slot)];
      const Matrix& pi = policy.steps[static_cast<std::size_t>(n)][static_cast<std::size_t>(parent.slot)];
      const auto& kernels = model.transition[static_cast<std::size_t>(child.symbol)];
      Vector next = Vector::Zero(model.num_states);
      for (int a = 0; a < model.num_actions; ++a) {
        const Vector weighted = pi.col(a).cwiseProduct(mu);
        next += kernels[static_cast<std::size_t>(a)].transpose() * weighted;
      }
      flow.steps[static_cast<std::size_t>(n + 1)][static_cast<std::size_t>(child.slot)] = next;
    });
  }
  return flow;
}

namespace {

// Per-row alias-free cumulative sampler for one (symbol, action) kernel.
struct RowSampler {
  std::vector<int> offsets;   // size |X|+1
  std::vector<Scalar> cumsum; // within-row running sums
  std::vector<int> cols;

  explicit RowSampler(const Kernel& k) {
    offsets.assign(static_cast<std::size_t>(k.rows()) + 1, 0);
    cumsum.reserve(static_cast<std::size_t>(k.nonZeros()));
    cols.reserve(static_cast<std::size_t>(k.nonZeros()));
    for (int x = 0; x < k.outerSize(); ++x) {
      Scalar acc = 0;
      for (Kernel::InnerIterator it(k, x); it; ++it) {
        acc += it.value();
        cumsum.push_back(acc);
        cols.push_back(static_cast<int>(it.col()));
      }
      offsets[static_cast<std::size_t>(x) + 1] = static_cast<int>(cols.size());
    }
  }

  int sample(int row, Scalar u) const {
    for (int i = offsets[static_cast<std::size_t>(row)]; i < offsets[static_cast<std::size_t>(row) + 1]; ++i)
      if (u < cumsum[static_cast<std::size_t>(i)]) return cols[static_cast<std::size_t>(i)];
    return cols[static_cast<std::size_t>(offsets[static_cast<std::size_t>(row) + 1]) - 1];
  }
};

int sample_from_vector(const Vector& weights, Scalar u) {
  Scalar acc = 0;
  for (int i = 0; i < weights.size(); ++i) {
    acc += weights(i);
    if (u < acc) return i;
  }
  return static_cast<int>(weights.size()) - 1;
}

}  // namespace

DistributionFlow estimate_empirical(const FiniteMFG& model, const PolicyFlow& policy,
                                    int episodes, std::uint64_t rng_seed, int threads) {
  if (!model.finite_horizon())
    throw ModeError("estimate_empirical requires a finite-horizon model");
  if (episodes < 1) throw std::invalid_argument("estimate_empirical: episodes must be >= 1");
  check_policy_shape(model, policy);
  check_policy_rows(policy);

  const NoiseTree& tree = model.noise_tree;
  const int symbols = tree.num_symbols();
  std::vector<std::vector<RowSampler>> samplers;
  samplers.reserve(static_cast<std::size_t>(symbols));
  for (int xi = 0; xi < symbols; ++xi) {
    std::vector<RowSampler> per_action;
    per_action.reserve(static_cast<std::size_t>(model.num_actions));
    for (int a = 0; a < model.num_actions; ++a)
      per_action.emplace_back(model.transition[static_cast<std::size_t>(xi)][static_cast<std::size_t>(a)]);
    samplers.push_back(std::move(per_action));
  }

  struct Counts {
    std::vector<std::vector<Vector>> state;  // [n][slot](x)
    std::vector<std::vector<Scalar>> visits; // [n][slot]
  };
  auto make_counts = [&] {
    Counts c;
    c.state.resize(static_cast<std::size_t>(model.num_steps()));
    c.visits.resize(static_cast<std::size_t>(model.num_steps()));
    for (int n = 0; n < model.num_steps(); ++n) {
      c.state[static_cast<std::size_t>(n)].assign(static_cast<std::size_t>(model.nodes_at(n)),
                                                  Vector::Zero(model.num_states));
      c.visits[static_cast<std::size_t>(n)].assign(static_cast<std::size_t>(model.nodes_at(n)), 0);
    }
    return c;
  };

  const int workers = std::max(1, std::min(threads, episodes));
  std::vector<Counts> partial(static_cast<std::size_t>(workers), make_counts());

  auto run_episode = [&](Counts& c, int episode) {
    Rng rng(derive_seed(rng_seed, "empirical-density", static_cast<std::uint64_t>(episode)));
    int x = sample_from_vector(model.mu0, rng.next_uniform());
    int node_id = 0;
    for (int n = 0; n <= model.horizon; ++n) {
      const NoiseNode& node = tree.node(node_id);
      c.state[static_cast<std::size_t>(n)][static_cast<std::size_t>(node.slot)](x) += 1;
      c.visits[static_cast<std::size_t>(n)][static_cast<std::size_t>(node.slot)] += 1;

      // Draw the step's common-noise symbol by descending one tree edge.
      const Scalar u_edge = rng.next_uniform();
      Scalar acc = 0;
      int child_id = node.children.back();
      for (int kid : node.children) {
        acc += tree.node(kid).edge_prob;
        if (u_edge < acc) {
          child_id = kid;
          break;
        }
      }
      const int symbol = tree.node(child_id).symbol;

      const Matrix& pi = policy.steps[static_cast<std::size_t>(n)][static_cast<std::size_t>(node.slot)];
      const int a = sample_from_vector(pi.row(x).transpose(), rng.next_uniform());
      if (n < model.horizon)
        x = samplers[static_cast<std::size_t>(symbol)][static_cast<std::size_t>(a)].sample(
            x, rng.next_uniform());
      node_id = child_id;
    }
  };

  parallel_for(workers, workers, [&](int w) {
    for (int k = w; k < episodes; k += workers) run_episode(partial[static_cast<std::size_t>(w)], k);
  });

  // Integer-valued accumulators reduce exactly in any order.
  Counts total = std::move(partial[0]);
  for (int w = 1; w < workers; ++w) {
    for (int n = 0; n < model.num_steps(); ++n)
      for (int s = 0; s < model.nodes_at(n); ++s) {
        total.state[static_cast<std::size_t>(n)][static_cast<std::size_t>(s)] +=
            partial[static_cast<std::size_t>(w)].state[static_cast<std::size_t>(n)][static_cast<std::size_t>(s)];
        total.visits[static_cast<std::size_t>(n)][static_cast<std::size_t>(s)] +=
            partial[static_cast<std::size_t>(w)].visits[static_cast<std::size_t>(n)][static_cast<std::size_t>(s)];
      }
  }

  DistributionFlow flow = DistributionFlow::zeros(model);
  flow.estimated.resize(static_cast<std::size_t>(model.num_steps()));
  for (int n = 0; n < model.num_steps(); ++n) {
    flow.estimated[static_cast<std::size_t>(n)].assign(static_cast<std::size_t>(model.nodes_at(n)), 0);
    for (int s = 0; s < model.nodes_at(n); ++s) {
      const Scalar visits = total.visits[static_cast<std::size_t>(n)][static_cast<std::size_t>(s)];
      if (visits > 0) {
        flow.steps[static_cast<std::size_t>(n)][static_cast<std::size_t>(s)] =
            total.state[static_cast<std::size_t>(n)][static_cast<std::size_t>(s)] / visits;
        flow.estimated[static_cast<std::size_t>(n)][static_cast<std::size_t>(s)] = 1;
      }
    }
  }
  return flow;
}

DistributionFlow occupancy_measure(const FiniteMFG& model, const PolicyFlow& stationary_policy) {
  if (model.finite_horizon())
    throw ModeError("occupancy_measure requires a discounted model (use propagate_exact)");
  if (!model.noise_tree.is_degenerate())
    throw ModeError("occupancy_measure does not support common noise");
  check_policy_shape(model, stationary_policy);
  check_policy_rows(stationary_policy);

  const Scalar gamma = model.discount;
  const Matrix p_pi = policy_kernel(model, stationary_policy.steps[0][0], 0);

  DistributionFlow flow = DistributionFlow::zeros(model);
  if (model.num_states <= 2000) {
    Matrix system = Matrix::Identity(model.num_states, model.num_states) - gamma * p_pi.transpose();
    flow.steps[0][0] = system.partialPivLu().solve(model.mu0);
  } else {
    Vector mu = model.mu0;
    const Matrix pt = p_pi.transpose();
    for (int iter = 0; iter < 100000; ++iter) {
      Vector next = model.mu0 + gamma * (pt * mu);
      const Scalar residual = (next - mu).cwiseAbs().maxCoeff();
      mu = std::move(next);
      if (residual < kLinearSolveTol) break;
    }
    flow.steps[0][0] = mu;
  }
  return flow;
}

DistributionFlow mix_flows(const DistributionFlow& average, const DistributionFlow& next, int j) {
  if (j < 1) throw std::invalid_argument("mix_flows: iteration index must be >= 1");
  if (average.steps.size() != next.steps.size()) throw ShapeError("mix_flows: step count mismatch");
  if (!average.fully_estimated() || !next.fully_estimated())
    throw std::invalid_argument("mix_flows: refusing to mix an unestimated scenario slice");
  if (j == 1) {
    DistributionFlow out = next;
    out.estimated.clear();
    return out;
  }

  DistributionFlow out;
  out.steps.resize(average.steps.size());
  const Scalar keep = Scalar(j - 1) / Scalar(j);
  const Scalar add = Scalar(1) / Scalar(j);
  for (std::size_t n = 0; n < average.steps.size(); ++n) {
    if (average.steps[n].size() != next.steps[n].size())
      throw ShapeError("mix_flows: node count mismatch at step " + std::to_string(n));
    out.steps[n].reserve(average.steps[n].size());
    for (std::size_t s = 0; s < average.steps[n].size(); ++s) {
      if (average.steps[n][s].size() != next.steps[n][s].size())
        throw ShapeError("mix_flows: slice size mismatch");
      out.steps[n].push_back(keep * average.steps[n][s] + add * next.steps[n][s]);
    }
  }
  return out;
}

}  // namespace mfg

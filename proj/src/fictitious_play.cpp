#include "mfg/fictitious_play.hpp"

#include <chrono>
#include <stdexcept>

#include "mfg/best_response.hpp"
#include "mfg/distribution.hpp"
#include "mfg/rng.hpp"

namespace mfg {

std::string to_string(BRBackend b) {
  return b == BRBackend::ModelBased ? "model_based" : "model_free";
}

std::string to_string(DensityBackend b) {
  return b == DensityBackend::Exact ? "exact" : "empirical";
}

void PolicyAverager::add(const DistributionFlow& flow, const PolicyFlow& policy) {
  if (numerator.empty()) {
    numerator.resize(policy.steps.size());
    denominator.resize(policy.steps.size());
    for (std::size_t n = 0; n < policy.steps.size(); ++n) {
      for (const Matrix& slice : policy.steps[n]) {
        numerator[n].push_back(Matrix::Zero(slice.rows(), slice.cols()));
        denominator[n].push_back(Vector::Zero(slice.rows()));
      }
    }
  }
  if (numerator.size() != policy.steps.size() || flow.steps.size() != policy.steps.size())
    throw ShapeError("PolicyAverager: table shape mismatch");
  for (std::size_t n = 0; n < policy.steps.size(); ++n) {
    if (numerator[n].size() != policy.steps[n].size() ||
        flow.steps[n].size() != policy.steps[n].size())
      throw ShapeError("PolicyAverager: node count mismatch at step " + std::to_string(n));
    for (std::size_t s = 0; s < policy.steps[n].size(); ++s) {
      numerator[n][s] +=
          (policy.steps[n][s].array().colwise() * flow.steps[n][s].array()).matrix();
      denominator[n][s] += flow.steps[n][s];
    }
  }
}

PolicyFlow PolicyAverager::average() const {
  PolicyFlow out;
  out.steps.resize(numerator.size());
  for (std::size_t n = 0; n < numerator.size(); ++n) {
    out.steps[n].reserve(numerator[n].size());
    for (std::size_t s = 0; s < numerator[n].size(); ++s) {
      const Matrix& num = numerator[n][s];
      const Vector& den = denominator[n][s];
      Matrix pi(num.rows(), num.cols());
      const Scalar uniform = Scalar(1) / num.cols();
      for (int x = 0; x < num.rows(); ++x) {
        if (den(x) > 0) {
          pi.row(x) = num.row(x) / den(x);
        } else {
          pi.row(x).setConstant(uniform);
        }
      }
      out.steps[n].push_back(std::move(pi));
    }
  }
  return out;
}

PolicyFlow average_policy_update(PolicyAverager& tables, const DistributionFlow& new_flow,
                                 const PolicyFlow& new_policy) {
  tables.add(new_flow, new_policy);
  return tables.average();
}

namespace {

void check_backends(const FiniteMFG& model, const FPConfig& cfg) {
  if (!model.finite_horizon()) {
    if (cfg.br_backend == BRBackend::ModelFree)
      throw ModeError("model-free best response is finite-horizon only");
    if (cfg.density_backend == DensityBackend::Empirical)
      throw ModeError("empirical density estimation is finite-horizon only");
  }
  if (model.noise_tree.num_nodes() > cfg.max_tree_nodes_exact)
    throw std::invalid_argument(
        "noise tree has " + std::to_string(model.noise_tree.num_nodes()) +
        " nodes; exact tree-enumerated exploitability is capped at " +
        std::to_string(cfg.max_tree_nodes_exact) + " - use a smaller scenario tree");
}

int default_episodes(const FiniteMFG& model) {
  const int steps = model.finite_horizon() ? std::max(model.horizon, 1) : 1;
  return 10 * model.num_states * steps;
}

DistributionFlow run_density(const FiniteMFG& model, const PolicyFlow& policy,
                             const FPConfig& cfg, int iteration) {
  DistributionFlow flow;
  if (cfg.density_backend == DensityBackend::Exact) {
    flow = model.finite_horizon() ? propagate_exact(model, policy, cfg.threads)
                                  : occupancy_measure(model, policy);
  } else {
    const int episodes =
        cfg.empirical_episodes > 0 ? cfg.empirical_episodes : default_episodes(model);
    flow = estimate_empirical(model, policy, episodes,
                              derive_seed(cfg.seed, "fp-density", static_cast<std::uint64_t>(iteration)),
                              cfg.threads);
    if (!flow.fully_estimated())
      throw std::runtime_error(
          "empirical density left scenario slices unestimated at iteration " +
          std::to_string(iteration) + "; increase the episode budget");
  }
  return flow;
}

PolicyFlow run_best_response(const FiniteMFG& model, FPState& state, const FPConfig& cfg,
                             int iteration) {
  if (cfg.br_backend == BRBackend::ModelBased) {
    return model.finite_horizon() ? backward_induction(model, state.mu_bar, cfg.threads).second
                                  : policy_iteration_discounted(model, state.mu_bar);
  }
  QLearningConfig ql;
  ql.episodes = cfg.ql_episodes > 0 ? cfg.ql_episodes : default_episodes(model);
  ql.alpha = cfg.ql_alpha;
  ql.epsilon = cfg.ql_epsilon;
  ql.rng_seed = derive_seed(cfg.seed, "fp-qlearning", static_cast<std::uint64_t>(iteration));
  if (cfg.ql_warm_start && state.learner_q) ql.warm_start = state.learner_q.get();
  auto [q, pi] = q_learning(model, state.mu_bar, ql);
  state.learner_q = std::make_shared<QTable>(std::move(q));
  return pi;
}

}  // namespace

FPState init_fp_state(const FiniteMFG& model, const FPConfig& cfg) {
  return init_fp_state(model, cfg, PolicyFlow::uniform(model));
}

FPState init_fp_state(const FiniteMFG& model, const FPConfig& cfg,
                      const PolicyFlow& initial_policy) {
  check_backends(model, cfg);
  check_policy_shape(model, initial_policy);
  FPState state;
  state.iteration = 0;
  state.last_br = initial_policy;
  state.pi_bar = initial_policy;
  state.mu_bar = run_density(model, initial_policy, cfg, 0);
  state.br_backend_id = to_string(cfg.br_backend);
  state.density_backend_id = to_string(cfg.density_backend);
  state.seed = cfg.seed;
  return state;
}

FPState fp_step(const FiniteMFG& model, FPState state, const FPConfig& cfg) {
  check_backends(model, cfg);
  const int j = state.iteration + 1;

  PolicyFlow br = run_best_response(model, state, cfg, j);
  DistributionFlow br_flow = run_density(model, br, cfg, j);

  state.mu_bar = mix_flows(state.mu_bar, br_flow, j);
  state.pi_bar = average_policy_update(state.averager, br_flow, br);
  state.last_br = std::move(br);
  if (cfg.retain_flows) state.retained_flows.push_back(br_flow);
  state.iteration = j;
  return state;
}

std::vector<int> geometric_cadence(int max_iteration) {
  std::vector<int> out;
  const int mantissa[] = {1, 2, 5};
  for (int decade = 1; decade <= max_iteration; decade *= 10) {
    for (int m : mantissa) {
      const long long it = static_cast<long long>(m) * decade;
      if (it <= max_iteration) out.push_back(static_cast<int>(it));
    }
  }
  return out;
}

FPResult run_fp(const FiniteMFG& model, const FPConfig& cfg) {
  if (cfg.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (cfg.eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
  check_backends(model, cfg);

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<Scalar>(std::chrono::steady_clock::now() - t_start).count();
  };

  std::vector<int> snapshot_at;
  if (cfg.record_snapshots) snapshot_at = geometric_cadence(cfg.iterations);

  FPResult result;
  result.br_backend_id = to_string(cfg.br_backend);
  result.density_backend_id = to_string(cfg.density_backend);
  result.seed = cfg.seed;
  result.ql_warm_start = cfg.ql_warm_start;

  FPState state = init_fp_state(model, cfg);
  for (int j = 1; j <= cfg.iterations; ++j) {
    const Scalar before = elapsed();
    state = fp_step(model, state, cfg);
    result.iteration_seconds.push_back(elapsed() - before);

    if (j % cfg.eval_every == 0 || j == 1 || j == cfg.iterations) {
      const TraceEvaluation eval = exploitability_with_value_gap(model, state.pi_bar, cfg.threads);
      FPTracePoint point;
      point.iteration = j;
      point.phi = eval.report.phi;
      point.phi_raw = eval.report.phi_raw;
      point.value_gap_sup = eval.value_gap_sup;
      point.wallclock_s = elapsed();
      if (cfg.proxy_metric && cfg.br_backend == BRBackend::ModelFree) {
        const DistributionFlow flow = propagate_exact(model, state.pi_bar, cfg.threads);
        point.phi_proxy =
            evaluate_return(model, state.last_br, flow, cfg.threads) - eval.report.j_policy;
      }
      result.trace.push_back(point);
    }
    if (!snapshot_at.empty() && j == snapshot_at.front()) {
      result.snapshots.emplace_back(j, state.mu_bar);
      snapshot_at.erase(snapshot_at.begin());
    }
  }
  result.pi_bar = std::move(state.pi_bar);
  result.mu_bar = std::move(state.mu_bar);
  return result;
}

}  // namespace mfg

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfg/model.hpp"

namespace mfg {

struct ScenarioReturn {
  int leaf_node = 0;
  Scalar probability = 0;
  Scalar j_policy = 0;
  Scalar j_best = 0;
};

struct ExploitabilityReport {
  Scalar phi = 0;      // clamped into [0, inf) when phi_raw is a tiny negative
  Scalar phi_raw = 0;  // j_best - j_policy, unclamped
  Scalar j_best = 0;
  Scalar j_policy = 0;
  std::string backend = "exact";
  // Conditional returns per full noise realization; empty without common noise.
  std::vector<ScenarioReturn> per_scenario;
};

/// Exact expected return of `policy` against the crowd flow `mu`:
/// the agent's own state marginal is propagated and rewards are accumulated as
///   sum_n sum_node P(node) sum_xi P(xi|node) sum_x marginal(x) E_pi[r].
/// In discounted mode the gamma-occupancy identity J = sum_x mu_gamma^pi(x)
/// r^pi(x, mu) is used. No sampling.
Scalar evaluate_return(const FiniteMFG& model, const PolicyFlow& policy,
                       const DistributionFlow& mu, int threads = 1);

/// Exploitability phi(pi) = max_pi' J(mu0, pi', mu^pi) - J(mu0, pi, mu^pi),
/// computed with the exact propagator and the exact best response
/// (backward induction, or policy iteration in the discounted regime).
ExploitabilityReport exploitability(const FiniteMFG& model, const PolicyFlow& policy,
                                    int threads = 1);

struct TraceEvaluation {
  ExploitabilityReport report;
  // Sup over states of V^BR_0 - V^pi_0, both against mu^pi. Since the best
  // response dominates pointwise, phi = mu0 . (V^BR_0 - V^pi_0) never exceeds
  // this gap; it is the value-difference diagnostic logged along fictitious
  // play traces.
  Scalar value_gap_sup = 0;
};

/// Exploitability together with the sup-norm time-0 value gap.
TraceEvaluation exploitability_with_value_gap(const FiniteMFG& model, const PolicyFlow& policy,
                                              int threads = 1);

struct MonotonicityReport {
  int trials = 0;
  Scalar max_value = 0;  // max over trials of sum_x (mu-mu')(rbar(mu)-rbar(mu'))
  int argmax_trial = -1;
  bool violated = false;  // max_value > tolerance
  Scalar tolerance = 0;
  Vector witness_mu;       // the maximizing pair
  Vector witness_mu_prime;
};

/// Samples `trials` pairs of distributions from the uniform (Dirichlet(1))
/// distribution on the simplex and evaluates the Lasry-Lions inequality on the
/// model's declared crowd term. Throws when the model declares no monotone
/// decomposition.
MonotonicityReport monotonicity_check(const FiniteMFG& model, int trials, std::uint64_t rng_seed,
                                      Scalar tolerance = 1e-12);

struct ResidualReport {
  std::vector<Vector> residual;  // per step n, over states
  Scalar sup_norm = 0;
  Scalar weighted_norm = 0;  // sum_n sum_x mu_n(x) |residual_n(x)|
  int argmax_step = -1;
  int argmax_state = -1;
};

/// Residual of a candidate value table in the optimal backward recursion
/// against `mu`:
///   residual_n(x) = V_n(x) - max_a { r(x,a,mu_n) + sum_x' p(x'|x,a) V_{n+1}(x') }
/// with V_{N+1} = 0. Finite-horizon, no common noise (degenerate trees only;
/// per-depth symbols are honored).
ResidualReport fixed_point_residual(const FiniteMFG& model, const std::vector<Vector>& value,
                                    const DistributionFlow& mu);

struct RateFit {
  Scalar slope = 0;
  Scalar intercept = 0;
  Scalar r_squared = 0;
  int points_used = 0;
};

/// Least-squares fit of log(phi) against log(j) over the trace window
/// j in [min_iteration, max_iteration]. Non-positive phi entries are dropped;
/// fewer than 5 surviving points is an error. The default window excludes the
/// first 10 iterations.
RateFit rate_fit(const std::vector<std::pair<int, Scalar>>& trace, int min_iteration = 11,
                 int max_iteration = std::numeric_limits<int>::max());

/// Greedy-optimal value vectors per step derived from a best-response QTable
/// (degenerate trees), used for residual diagnostics.
std::vector<Vector> optimal_values(const QTable& q);

}  // namespace mfg

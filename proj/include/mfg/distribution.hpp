#pragma once

#include <cstdint>

#include "mfg/model.hpp"

namespace mfg {

/// Exact population flow induced by `policy`: mu_0 = mu0 at the root and, for
/// every tree edge (node, symbol) -> child,
///   mu_{n+1}(x'|child) = sum_{x,a} pi_n(a|x,node) p(x'|x,a,symbol) mu_n(x|node).
/// Parallelizes over the nodes of each depth; per-node writes are disjoint so
/// results do not depend on the worker count.
DistributionFlow propagate_exact(const FiniteMFG& model, const PolicyFlow& policy,
                                 int threads = 1);

/// Monte Carlo estimate of the induced flow from `episodes` sampled
/// trajectories. Each episode samples one tree path; counts are normalized per
/// visited (step, node). Slices never visited are flagged in
/// `DistributionFlow::estimated` rather than silently zeroed. Deterministic
/// given the seed: episode k draws from a stream derived from (seed, k).
DistributionFlow estimate_empirical(const FiniteMFG& model, const PolicyFlow& policy,
                                    int episodes, std::uint64_t rng_seed, int threads = 1);

/// Discounted occupancy measure of a stationary policy:
///   mu_gamma(x') = mu0(x') + gamma * sum_x p^pi(x'|x) mu_gamma(x),
/// solved directly for |X| <= 2000 and by fixed-point iteration above.
/// The result sums to 1/(1-gamma).
DistributionFlow occupancy_measure(const FiniteMFG& model, const PolicyFlow& stationary_policy);

/// Fictitious-play averaging step: (j-1)/j * average + 1/j * next, per entry.
DistributionFlow mix_flows(const DistributionFlow& average, const DistributionFlow& next, int j);

/// Policy-induced single-symbol kernel p^pi(x'|x) = sum_a pi(a|x) p(x'|x,a).
Matrix policy_kernel(const FiniteMFG& model, const Matrix& policy_slice, int symbol);

}  // namespace mfg

#include "doctest.h"

#include "mfg/best_response.hpp"
#include "mfg/distribution.hpp"
#include "mfg/environments.hpp"
#include "mfg/metrics.hpp"
#include "mfg/model.hpp"
#include "test_support.hpp"

using namespace mfg;
namespace ts = test_support;

TEST_CASE("validate_mfg accepts a well-formed 2-state model") {
  const FiniteMFG model = ts::make_chain_model();
  const ValidationReport report = validate_mfg(model);
  CHECK(report.ok());
  CHECK(report.violations.empty());
  CHECK(report.warnings.empty());
}

TEST_CASE("validate_mfg reports a transition row off mass with its location") {
  Matrix bad(2, 2);
  bad << 0.5, 0.4, 0, 1;  // row 0 sums to 0.9
  Matrix good(2, 2);
  good << 1, 0, 0, 1;
  Vector mu0(2);
  mu0 << 1, 0;
  const FiniteMFG model = ts::make_table_model(1, {bad, good}, mu0, Matrix::Zero(2, 2));

  const ValidationReport report = validate_mfg(model);
  REQUIRE_FALSE(report.ok());
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].location == "transition (x=0,a=0,xi=0)");
  CHECK(report.violations[0].message.find("0.9") != std::string::npos);
}

TEST_CASE("validate_mfg reports a negative mu0 entry naming the state") {
  FiniteMFG model = ts::make_chain_model();
  model.mu0(1) = -0.25;
  model.mu0(0) = 1.25;
  const ValidationReport report = validate_mfg(model);
  REQUIRE_FALSE(report.ok());
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].location == "mu0 x=1");
}

TEST_CASE("validation is idempotent and read-only") {
  FiniteMFG model = ts::make_chain_model();
  model.mu0(0) = 0.7;  // mass 0.7 total, one violation
  model.mu0(1) = 0.0;
  const std::string first = validate_mfg(model).to_string();
  const std::string second = validate_mfg(model).to_string();
  CHECK(first == second);
}

TEST_CASE("enumerate_scenarios on a degenerate tree") {
  const NoiseTree tree = NoiseTree::degenerate(5);
  for (int depth = 0; depth <= 5; ++depth) {
    const auto scenarios = tree.enumerate_scenarios(depth);
    REQUIRE(scenarios.size() == 1);
    CHECK(scenarios[0].second == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(tree.enumerate_scenarios(6), std::out_of_range);
}

TEST_CASE("enumerate_scenarios on the single-closure beach bar tree") {
  BeachBarParams params;
  params.num_states = 10;
  params.horizon = 30;
  params.common_noise = BeachBarParams::CommonNoise::ClosureAtStep;
  params.closure_step = 15;
  params.p_close = 0.5;
  const FiniteMFG model = build_beach_bar(params);

  for (int depth = 16; depth <= 31; ++depth) {
    const auto scenarios = model.noise_tree.enumerate_scenarios(depth);
    REQUIRE(scenarios.size() == 2);
    CHECK(scenarios[0].second == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(scenarios[1].second == doctest::Approx(0.5).epsilon(1e-15));
  }
  CHECK(model.noise_tree.enumerate_scenarios(15).size() == 1);
}

TEST_CASE("enumerate_scenarios on the closure-window beach bar tree") {
  BeachBarParams params;
  params.num_states = 10;
  params.horizon = 30;
  params.common_noise = BeachBarParams::CommonNoise::ClosureWindow;
  params.p_close = 0.3;
  const FiniteMFG model = build_beach_bar(params);

  const int window = params.horizon / 2;
  for (int depth = window; depth <= params.horizon + 1; ++depth) {
    const auto scenarios = model.noise_tree.enumerate_scenarios(depth);
    CHECK(static_cast<int>(scenarios.size()) == window + 1);
    Scalar mass = 0;
    for (const auto& [node, prob] : scenarios) mass += prob;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("scenario probabilities sum to one at every depth") {
  LQParams params;
  params.num_states = 5;
  params.horizon = 4;
  params.action_bound = 1;
  params.cn_alphabet = 3;
  const FiniteMFG model = build_lq_cn(params);
  for (int depth = 0; depth <= model.noise_tree.depth(); ++depth) {
    Scalar mass = 0;
    for (const auto& [node, prob] : model.noise_tree.enumerate_scenarios(depth)) mass += prob;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("noise tree node ids are depth-first and slots match levels") {
  BeachBarParams params;
  params.num_states = 4;
  params.horizon = 6;
  params.common_noise = BeachBarParams::CommonNoise::ClosureWindow;
  const FiniteMFG model = build_beach_bar(params);
  const NoiseTree& tree = model.noise_tree;

  CHECK(tree.node(0).parent == -1);
  for (const NoiseNode& node : tree.nodes()) {
    if (node.parent >= 0) CHECK(node.parent < node.id);  // preorder
    CHECK(tree.level(node.depth)[static_cast<std::size_t>(node.slot)] == node.id);
  }
}

TEST_CASE("degenerate-tree results are bit-identical to a flat no-noise path") {
  // The library has only the tree path; this pins it against dedicated
  // no-common-noise implementations.
  for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
    const FiniteMFG model = ts::make_random_model(seed, 3, 2, 3);
    const PolicyFlow policy = ts::random_stochastic_policy(model, seed);

    const DistributionFlow flow = propagate_exact(model, policy);
    const DistributionFlow flat = ts::ref_propagate(model, policy);
    for (int n = 0; n <= model.horizon; ++n)
      CHECK(ts::bit_equal(flow.steps[static_cast<std::size_t>(n)][0],
                          flat.steps[static_cast<std::size_t>(n)][0]));

    const auto [q, br] = backward_induction(model, flow);
    const std::vector<Matrix> q_flat = ts::ref_backward_induction(model, flow);
    for (int n = 0; n <= model.horizon; ++n)
      CHECK(ts::bit_equal(q.steps[static_cast<std::size_t>(n)][0],
                          q_flat[static_cast<std::size_t>(n)]));

    const Scalar j = evaluate_return(model, policy, flow);
    const Scalar j_flat = ts::ref_return(model, policy, flow, flat);
    CHECK(j == j_flat);
  }
}

TEST_CASE("the LQ terminal-step switch also unifies bit-exactly") {
  LQParams params;
  params.num_states = 11;
  params.horizon = 3;
  params.action_bound = 2;
  const FiniteMFG model = build_lq(params);
  const PolicyFlow policy = PolicyFlow::uniform(model);

  const DistributionFlow flow = propagate_exact(model, policy);
  const DistributionFlow flat = ts::ref_propagate(model, policy);
  CHECK(ts::max_abs_difference(flow, flat) == 0);

  const auto [q, br] = backward_induction(model, flow);
  const auto q_flat = ts::ref_backward_induction(model, flow);
  for (int n = 0; n <= model.horizon; ++n)
    CHECK(ts::bit_equal(q.steps[static_cast<std::size_t>(n)][0],
                        q_flat[static_cast<std::size_t>(n)]));
  CHECK(evaluate_return(model, policy, flow) == ts::ref_return(model, policy, flow, flat));
}

TEST_CASE("check_policy_rows rejects NaN and non-normalized rows") {
  const FiniteMFG model = ts::make_chain_model();
  PolicyFlow bad = PolicyFlow::uniform(model);
  bad.steps[1][0](0, 0) = 0.7;  // row no longer sums to 1
  CHECK_THROWS_AS(check_policy_rows(bad), std::invalid_argument);
  CHECK_THROWS_AS(propagate_exact(model, bad), std::invalid_argument);

  PolicyFlow nan_policy = PolicyFlow::uniform(model);
  nan_policy.steps[0][0](1, 1) = std::numeric_limits<Scalar>::quiet_NaN();
  CHECK_THROWS_AS(check_policy_rows(nan_policy), std::invalid_argument);
}

TEST_CASE("derived values V are consistent with the policy-weighted Q") {
  const FiniteMFG model = ts::make_random_model(21, 3, 2, 2);
  const PolicyFlow policy = ts::random_stochastic_policy(model, 22);
  const DistributionFlow flow = propagate_exact(model, policy);
  const QTable q = evaluate_policy(model, policy, flow);
  for (int n = 0; n <= model.horizon; ++n) {
    const Matrix& slice = q.steps[static_cast<std::size_t>(n)][0];
    const Matrix& pi = policy.steps[static_cast<std::size_t>(n)][0];
    const Vector v = values_under_policy(slice, pi);
    for (int x = 0; x < model.num_states; ++x) {
      Scalar expected = 0;
      for (int a = 0; a < model.num_actions; ++a) expected += pi(x, a) * slice(x, a);
      CHECK(std::abs(v(x) - expected) <= kValueConsistencyTol);
    }
  }
}

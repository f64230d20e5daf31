#include "doctest.h"

#include <algorithm>

#include "mfg/distribution.hpp"
#include "mfg/environments.hpp"
#include "test_support.hpp"

using namespace mfg;
namespace ts = test_support;

namespace {

Scalar slice_tv(const DistributionFlow& a, const DistributionFlow& b, int n) {
  return total_variation(a.steps[static_cast<std::size_t>(n)][0],
                         b.steps[static_cast<std::size_t>(n)][0]);
}

void check_mass(const DistributionFlow& flow, Scalar target, Scalar tol) {
  for (const auto& level : flow.steps)
    for (const Vector& slice : level) CHECK(is_mass_vector(slice, target, tol));
}

}  // namespace

TEST_CASE("propagate_exact keeps mu0 under identity dynamics") {
  const Matrix identity = Matrix::Identity(3, 3);
  Vector mu0(3);
  mu0 << 0.2, 0.5, 0.3;
  const FiniteMFG model = ts::make_table_model(4, {identity, identity}, mu0, Matrix::Zero(3, 2));
  const DistributionFlow flow = propagate_exact(model, ts::random_stochastic_policy(model, 3));
  for (int n = 0; n <= 4; ++n)
    CHECK((flow.steps[static_cast<std::size_t>(n)][0] - mu0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("propagate_exact keeps the uniform distribution on the torus") {
  BeachBarParams params;
  params.num_states = 20;
  params.horizon = 10;
  const FiniteMFG model = build_beach_bar(params);
  const DistributionFlow flow = propagate_exact(model, PolicyFlow::uniform(model));
  const Vector uniform = Vector::Constant(20, 1.0 / 20);
  for (int n = 0; n <= 10; ++n)
    CHECK((flow.steps[static_cast<std::size_t>(n)][0] - uniform).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("propagate_exact reproduces the hand-computed chain flow") {
  const FiniteMFG model = ts::make_chain_model(2);
  const DistributionFlow flow = propagate_exact(model, PolicyFlow::uniform(model));
  // Matrix-product oracle on p(x1|x0)=1, p(x1|x1)=1, mu0=(1,0):
  // ((1,0),(0,1),(0,1)).
  CHECK(flow.steps[0][0](0) == 1.0);
  CHECK(flow.steps[0][0](1) == 0.0);
  CHECK(flow.steps[1][0](0) == 0.0);
  CHECK(flow.steps[1][0](1) == 1.0);
  CHECK(flow.steps[2][0](0) == 0.0);
  CHECK(flow.steps[2][0](1) == 1.0);
}

TEST_CASE("propagate_exact satisfies the forward balance equation") {
  const FiniteMFG model = ts::make_random_model(11, 4, 3, 5);
  const PolicyFlow policy = ts::random_stochastic_policy(model, 12);
  const DistributionFlow flow = propagate_exact(model, policy);
  check_mass(flow, 1.0, kFlowMassTol);

  for (int n = 0; n < model.horizon; ++n) {
    const Vector& mu = flow.steps[static_cast<std::size_t>(n)][0];
    const Matrix& pi = policy.steps[static_cast<std::size_t>(n)][0];
    Vector expected = Vector::Zero(model.num_states);
    for (int x = 0; x < model.num_states; ++x)
      for (int a = 0; a < model.num_actions; ++a)
        for (int y = 0; y < model.num_states; ++y)
          expected(y) += pi(x, a) * model.transition[0][static_cast<std::size_t>(a)].coeff(x, y) * mu(x);
    CHECK((flow.steps[static_cast<std::size_t>(n) + 1][0] - expected).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("propagate_exact is independent of the worker count") {
  const FiniteMFG model = ts::make_random_model(31, 4, 2, 6);
  const PolicyFlow policy = ts::random_stochastic_policy(model, 32);
  const DistributionFlow one = propagate_exact(model, policy, 1);
  const DistributionFlow four = propagate_exact(model, policy, 4);
  CHECK(ts::max_abs_difference(one, four) == 0);
}

TEST_CASE("estimate_empirical is exact for a deterministic trajectory") {
  Matrix shift(2, 2);
  shift << 0, 1, 0, 1;
  Vector point(2);
  point << 1, 0;
  const FiniteMFG model = ts::make_table_model(2, {shift, shift}, point, Matrix::Zero(2, 2));
  PolicyFlow still = PolicyFlow::zeros(model);
  for (auto& level : still.steps) level[0].col(0).setOnes();

  for (int episodes : {1, 7, 50}) {
    const DistributionFlow flow = estimate_empirical(model, still, episodes, 99);
    CHECK(flow.fully_estimated());
    CHECK(flow.steps[0][0](0) == 1.0);
    CHECK(flow.steps[1][0](1) == 1.0);
    CHECK(flow.steps[2][0](1) == 1.0);
  }
}

TEST_CASE("estimate_empirical approaches the exact flow") {
  const FiniteMFG model = ts::make_random_model(41, 2, 2, 2);
  const PolicyFlow policy = ts::random_stochastic_policy(model, 42);
  const DistributionFlow exact = propagate_exact(model, policy);
  const DistributionFlow empirical = estimate_empirical(model, policy, 10000, 4242);
  for (int n = 0; n <= model.horizon; ++n) CHECK(slice_tv(exact, empirical, n) < 0.05);
}

TEST_CASE("estimate_empirical error shrinks like one over sqrt episodes") {
  const FiniteMFG model = ts::make_random_model(41, 2, 2, 2);
  const PolicyFlow policy = ts::random_stochastic_policy(model, 42);
  const DistributionFlow exact = propagate_exact(model, policy);

  auto median_tv = [&](int episodes) {
    std::vector<Scalar> tvs;
    for (std::uint64_t seed = 0; seed < 11; ++seed) {
      const DistributionFlow est = estimate_empirical(model, policy, episodes, 1000 + seed);
      Scalar worst = 0;
      for (int n = 0; n <= model.horizon; ++n) worst = std::max(worst, slice_tv(exact, est, n));
      tvs.push_back(worst);
    }
    std::sort(tvs.begin(), tvs.end());
    return tvs[tvs.size() / 2];
  };

  const Scalar coarse = median_tv(1000);
  const Scalar fine = median_tv(100000);
  const Scalar ratio = coarse / fine;  // expect ~10 for a 100x episode budget
  CHECK(ratio > 5);
  CHECK(ratio < 20);
}

TEST_CASE("estimate_empirical is a consistent estimator on the beach bar") {
  BeachBarParams params;
  params.num_states = 20;
  params.horizon = 8;
  const FiniteMFG model = build_beach_bar(params);
  const PolicyFlow policy = ts::random_stochastic_policy(model, 5);
  const DistributionFlow exact = propagate_exact(model, policy);

  std::vector<Scalar> medians;
  for (int episodes : {200, 2000, 20000}) {
    std::vector<Scalar> tvs;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const DistributionFlow est = estimate_empirical(model, policy, episodes, 7000 + seed);
      Scalar worst = 0;
      for (int n = 0; n <= model.horizon; ++n) worst = std::max(worst, slice_tv(exact, est, n));
      tvs.push_back(worst);
    }
    std::sort(tvs.begin(), tvs.end());
    medians.push_back(tvs[tvs.size() / 2]);
  }
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}

TEST_CASE("estimate_empirical flags never-visited scenario slices") {
  BeachBarParams params;
  params.num_states = 6;
  params.horizon = 4;
  params.common_noise = BeachBarParams::CommonNoise::ClosureAtStep;
  params.closure_step = 2;
  params.p_close = 0.5;
  const FiniteMFG model = build_beach_bar(params);
  const PolicyFlow policy = PolicyFlow::uniform(model);

  // One episode can only visit one of the two branches.
  const DistributionFlow flow = estimate_empirical(model, policy, 1, 3);
  CHECK_FALSE(flow.fully_estimated());
  // The symbol drawn at the closure step conditions distributions from the
  // next step on, so one branch per step after it goes unvisited.
  int unestimated = 0;
  for (const auto& level : flow.estimated)
    for (auto flag : level)
      if (!flag) ++unestimated;
  CHECK(unestimated == model.horizon - params.closure_step);

  // A healthy budget visits everything.
  CHECK(estimate_empirical(model, policy, 200, 3).fully_estimated());
}

TEST_CASE("estimate_empirical is schedule-independent") {
  const FiniteMFG model = ts::make_random_model(51, 3, 2, 4);
  const PolicyFlow policy = ts::random_stochastic_policy(model, 52);
  const DistributionFlow one = estimate_empirical(model, policy, 500, 11, 1);
  const DistributionFlow four = estimate_empirical(model, policy, 500, 11, 4);
  CHECK(ts::max_abs_difference(one, four) == 0);
}

TEST_CASE("occupancy_measure of a single state is the geometric series") {
  FiniteMFG model;
  model.num_states = 1;
  model.num_actions = 1;
  model.mode = TimeMode::Discounted;
  model.discount = 0.9;
  model.mu0 = Vector::Ones(1);
  model.noise_tree = NoiseTree::degenerate(1);
  model.transition.push_back({ts::dense_to_kernel(Matrix::Ones(1, 1))});
  model.reward = [](const Vector&, int) { return Matrix::Ones(1, 1); };

  const DistributionFlow occ = occupancy_measure(model, PolicyFlow::uniform(model));
  CHECK(occ.steps[0][0](0) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("occupancy_measure normalizes to 1/(1-gamma)") {
  BeachBarParams params;
  params.num_states = 30;
  params.discount = 0.9;
  const FiniteMFG model = build_beach_bar(params);
  for (std::uint64_t seed : {1ULL, 2ULL}) {
    const DistributionFlow occ =
        occupancy_measure(model, ts::random_stochastic_policy(model, seed));
    CHECK(std::abs(occ.steps[0][0].sum() - 10.0) < kOccupancyMassTol);
    CHECK((occ.steps[0][0].array() >= 0).all());
  }
}

TEST_CASE("occupancy_measure matches the truncated geometric series") {
  // 2-state periodic swap under both actions.
  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  FiniteMFG model;
  model.num_states = 2;
  model.num_actions = 1;
  model.mode = TimeMode::Discounted;
  model.discount = 0.9;
  model.mu0 = Vector(2);
  model.mu0 << 1, 0;
  model.noise_tree = NoiseTree::degenerate(1);
  model.transition.push_back({ts::dense_to_kernel(swap)});
  model.reward = [](const Vector&, int) { return Matrix::Zero(2, 1); };

  const DistributionFlow occ = occupancy_measure(model, PolicyFlow::uniform(model));

  Vector series = Vector::Zero(2);
  Vector term(2);
  term << 1, 0;
  Scalar weight = 1;
  for (int n = 0; n <= 200; ++n) {
    series += weight * term;
    term = Vector(swap.transpose() * term);
    weight *= 0.9;
  }
  const Scalar tol = 10 * std::pow(0.9, 201);
  CHECK((occ.steps[0][0] - series).cwiseAbs().maxCoeff() < tol);
}

TEST_CASE("occupancy_measure rejects finite-horizon models") {
  const FiniteMFG model = ts::make_chain_model();
  CHECK_THROWS_AS(occupancy_measure(model, PolicyFlow::uniform(model)), ModeError);
}

TEST_CASE("mix_flows follows the fictitious play weights") {
  const FiniteMFG model = ts::make_chain_model(0);
  DistributionFlow average = DistributionFlow::zeros(model);
  DistributionFlow next = DistributionFlow::zeros(model);
  average.steps[0][0] << 0.5, 0.5;
  next.steps[0][0] << 1, 0;

  SUBCASE("j=1 returns the new flow exactly") {
    const DistributionFlow mixed = mix_flows(average, next, 1);
    CHECK(mixed.steps[0][0](0) == 1.0);
    CHECK(mixed.steps[0][0](1) == 0.0);
  }
  SUBCASE("j=2 is the midpoint") {
    const DistributionFlow mixed = mix_flows(average, next, 2);
    CHECK(mixed.steps[0][0](0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(mixed.steps[0][0](1) == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("shape mismatch is an error") {
    DistributionFlow wrong;
    wrong.steps.resize(1);
    wrong.steps[0].push_back(Vector::Zero(3));
    CHECK_THROWS_AS(mix_flows(average, wrong, 2), ShapeError);
  }
}

TEST_CASE("sequential mixes telescope to the arithmetic mean") {
  const FiniteMFG model = ts::make_random_model(61, 3, 2, 3);
  std::vector<DistributionFlow> flows;
  for (std::uint64_t seed = 0; seed < 6; ++seed)
    flows.push_back(propagate_exact(model, ts::random_stochastic_policy(model, 100 + seed)));

  DistributionFlow average = flows[0];
  for (int j = 1; j <= 6; ++j) average = mix_flows(average, flows[static_cast<std::size_t>(j - 1)], j);

  DistributionFlow mean = DistributionFlow::zeros(model);
  for (const DistributionFlow& f : flows)
    for (std::size_t n = 0; n < mean.steps.size(); ++n)
      mean.steps[n][0] += f.steps[n][0] / 6.0;

  CHECK(ts::max_abs_difference(average, mean) < 1e-12);
  check_mass(average, 1.0, kFlowMassTol);
}

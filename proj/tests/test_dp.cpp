#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ssp/dp.hpp"
#include "ssp/gridworld.hpp"
#include "ssp/properness.hpp"
#include "support.hpp"

using namespace ssp;
using namespace ssp::testing;

namespace {

std::vector<double> reward_values(const ValueFunction& J) {
  std::vector<double> out;
  for (StateIndex i = 0; i < gridworld::kCells; ++i) out.push_back(-J[i]);
  return out;
}

}  // namespace

TEST_CASE("backups on the two-state example") {
  const auto bt = bt_instance();
  const auto half = values({0.0, 0.5}, 0);
  CHECK(bellman_backup(bt, half)[kBtState] == 1.5);
  CHECK(bellman_backup(bt, values({0.0, 2.0}, 0))[kBtState] == 2.0);
  CHECK(policy_backup(bt, DeterministicPolicy({0, kStay}), values({0.0, 0.0}, 0))[kBtState] ==
        1.0);
  CHECK(stochastic_policy_backup(bt, uniform_random_policy(bt), values({0.0, 0.0}, 0))[kBtState] ==
        1.5);
  CHECK(greedy_policy(bt, half)[kBtState] == kStay);
  // Tie at J = 2 (2 + 0 == 1 + 2): lowest index wins.
  CHECK(greedy_policy(bt, values({0.0, 2.0}, 0))[kBtState] == kGo);

  const auto single = ProblemBuilder(1, 1, 0).absorbing_terminal().build();
  CHECK(bellman_backup(single, ValueFunction::zeros(single))[0] == 0.0);
}

TEST_CASE("residual statistics") {
  const auto bt = bt_instance();
  const auto s = bellman_residual(bt, values({0.0, 0.5}, 0));
  CHECK(s.c_bar == 1.0);
  CHECK(s.c_under == 0.0);  // terminal row
  CHECK(s.residual == 1.0);
  CHECK(bellman_residual(bt, values({0.0, 2.0}, 0)).residual == 0.0);
  const auto over = bellman_residual(bt, values({0.0, 5.0}, 0));
  CHECK(over.c_under == -3.0);
  CHECK(over.residual == 3.0);

  const auto grid = build_gridworld();
  const auto J = evaluate_policy(grid, uniform_random_policy(grid));
  CHECK(bellman_residual(grid, J).residual == doctest::Approx(0.9567).epsilon(0.0005 / 0.9567));
}

TEST_CASE("uniform improvability") {
  const auto bt = bt_instance();
  CHECK_FALSE(is_uniformly_improvable(bt, values({0.0, 0.0}, 0)));
  CHECK(is_uniformly_improvable(bt, values({0.0, 2.0}, 0)));
  CHECK_THROWS_AS(require_uniformly_improvable(bt, values({0.0, 0.0}, 0)),
                  NotUniformlyImprovableError);
  try {
    require_uniformly_improvable(bt, values({0.0, 0.0}, 0));
  } catch (const NotUniformlyImprovableError& e) {
    CHECK(e.state() == kBtState);
    CHECK(e.excess() == 1.0);
  }
  const auto grid = build_gridworld();
  CHECK(is_uniformly_improvable(grid, evaluate_policy(grid, uniform_random_policy(grid))));
}

TEST_CASE("value iteration") {
  const auto bt = bt_instance();
  const auto r = value_iteration(bt, values({0.0, 0.0}, 0), 1e-9, 100);
  CHECK(r.converged);
  REQUIRE(r.trace.size() >= 3);
  CHECK(r.trace[1].value[kBtState] == 1.0);
  CHECK(r.trace[2].value[kBtState] == 2.0);
  CHECK(r.value[kBtState] == 2.0);

  SUBCASE("loose epsilon returns J0 untouched") {
    const auto J0 = values({0.0, 7.0}, 0);
    const auto same = value_iteration(bt, J0, 100.0, 10);
    CHECK(same.converged);
    CHECK(same.trace.size() == 1);
    CHECK(same.value == J0);
  }
  SUBCASE("max_iters stops early with the partial trace") {
    const auto grid = build_gridworld();
    const auto partial = value_iteration(grid, ValueFunction::zeros(grid), 1e-12, 3);
    CHECK_FALSE(partial.converged);
    CHECK(partial.trace.size() == 4);
  }
  CHECK_THROWS_AS(value_iteration(bt, values({0.0, 0.0}, 0), 0.0, 10), std::invalid_argument);
}

TEST_CASE("gridworld value iteration residual sequence") {
  const auto grid = build_gridworld();
  const auto J0 = evaluate_policy(grid, uniform_random_policy(grid));
  const auto r = value_iteration(grid, J0, 1e-300, 12);
  const double expected[] = {0.9567, 0.8470, 0.7379, 0.6585, 0.6204, 0.4094,
                             0.2568, 0.1389, 0.0726, 0.0613, 0.0411, 0.0259};
  REQUIRE(r.trace.size() == 13);
  for (std::size_t k = 0; k < 12; ++k) {
    CAPTURE(k);
    CHECK(std::abs(r.trace[k].stats.residual - expected[k]) <= 0.001);
  }
  // Monotone decrease from an improvable start.
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    for (StateIndex i = 0; i < grid.num_states(); ++i) {
      CHECK(r.trace[k].value[i] <= r.trace[k - 1].value[i] + 1e-12);
    }
  }
}

TEST_CASE("policy evaluation") {
  const auto bt = bt_instance();
  CHECK(evaluate_policy(bt, DeterministicPolicy({0, kGo}))[kBtState] == doctest::Approx(2.0));
  try {
    evaluate_policy(bt, DeterministicPolicy({0, kStay}));
    FAIL("expected ImproperPolicy");
  } catch (const ImproperPolicyError& e) {
    CHECK(e.states() == std::vector<StateIndex>{kBtState});
  }

  const auto grid = build_gridworld();
  const auto J = reward_values(evaluate_policy(grid, uniform_random_policy(grid)));
  const double table[] = {-1.28, -0.88, -0.32, 1.00, -1.52, -0.92,
                          -1.00, -1.60, -1.52, -1.28, -1.22};
  for (std::size_t i = 0; i < 11; ++i) {
    CAPTURE(i);
    CHECK(std::abs(J[i] - table[i]) <= 0.01);
  }
}

TEST_CASE("policy evaluation matches an independent elimination") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 300; ++k) {
    const auto p = random_with_proper_policy(rng);
    std::vector<ActionIndex> mu(p.num_states(), 0);
    const auto J = evaluate_policy(p, DeterministicPolicy(mu));
    const auto oracle = oracle_policy_value(p, mu);
    for (StateIndex i = 0; i < p.num_states(); ++i) CHECK(J[i] == doctest::Approx(oracle[i]));
    const auto TJ = policy_backup(p, DeterministicPolicy(mu), J);
    CHECK(max_norm_distance(TJ, J) <= kEvaluationResidualTolerance);
  }
}

TEST_CASE("policy iteration") {
  const auto grid = build_gridworld();
  const auto r = policy_iteration(grid, uniform_random_policy(grid), 100);
  CHECK(r.converged);
  CHECK(r.improvements == 4);
  REQUIRE(r.trace.size() == 5);
  CHECK(r.trace[3].value == r.trace[4].value);
  CHECK(std::abs(r.trace[2].stats.residual - 0.0186) <= 0.001);
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    for (StateIndex i = 0; i < grid.num_states(); ++i) {
      CHECK(r.trace[k].value[i] <= r.trace[k - 1].value[i] + 1e-10);
    }
  }
  // Converged values and policy.
  const auto J = reward_values(r.value);
  const double table[] = {0.81, 0.87, 0.92, 1.00, 0.76, 0.66, -1.00, 0.71, 0.66, 0.61, 0.39};
  for (std::size_t i = 0; i < 11; ++i) CHECK(std::abs(J[i] - table[i]) <= 0.01);
  const auto mu = greedy_policy(grid, r.value);
  CHECK(mu[7] == 0);  // north, away from the -1 exit
  CHECK(mu[0] == 1);
  CHECK(mu[1] == 1);
  CHECK(mu[2] == 1);
  CHECK(mu[4] == 0);
  CHECK(mu[5] == 0);

  SUBCASE("starting from the optimum stops after one improvement") {
    const auto again = policy_iteration(grid, r.policy, 100);
    CHECK(again.improvements == 1);
    CHECK(again.trace.size() == 2);
    CHECK(again.policy == r.policy);
  }
  SUBCASE("improper start") {
    const auto bt = bt_instance();
    CHECK_THROWS_AS(policy_iteration(bt, DeterministicPolicy({0, kStay}), 10),
                    ImproperPolicyError);
  }
}

TEST_CASE("oracle agreement on all-proper instances") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 150; ++k) {
    const auto p = random_all_proper(rng, {2, 6, 1, 3});
    const auto brute = oracle_brute_force(p);
    const auto vi = value_iteration(p, ValueFunction::zeros(p), 1e-12, 1'000'000);
    REQUIRE(vi.converged);
    const auto pi = policy_iteration(p, uniform_random_policy(p), 1000);
    REQUIRE(pi.converged);
    for (StateIndex i = 0; i < p.num_states(); ++i) {
      CHECK(std::abs(vi.value[i] - brute[i]) <= 1e-8);
      CHECK(std::abs(pi.value[i] - brute[i]) <= 1e-8);
    }
  }
}

TEST_CASE("monotonicity, closure, greedy consistency on random instances") {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 300; ++k) {
    const auto p = random_with_proper_policy(rng);
    const std::size_t n = p.num_states();
    std::vector<double> a(n, 0.0), b(n, 0.0);
    for (StateIndex i = 0; i < n; ++i) {
      if (i == p.terminal()) continue;
      a[i] = uniform(rng, -3.0, 3.0);
      b[i] = a[i] + uniform(rng, 0.0, 2.0);
    }
    const ValueFunction J(a, p.terminal());
    const ValueFunction Jp(b, p.terminal());
    const auto TJ = bellman_backup(p, J);
    const auto TJp = bellman_backup(p, Jp);
    for (StateIndex i = 0; i < n; ++i) CHECK(TJ[i] <= TJp[i]);

    const auto mu = greedy_policy(p, J);
    CHECK(policy_backup(p, mu, J) == TJ);

    if (is_uniformly_improvable(p, J)) CHECK(is_uniformly_improvable(p, TJ));
    const auto Ju = evaluate_policy(p, uniform_random_policy(p));
    CHECK(is_uniformly_improvable(p, Ju));
    CHECK(is_uniformly_improvable(p, bellman_backup(p, Ju)));
  }
}

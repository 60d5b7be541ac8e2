#include <doctest.h>

#include "bootrl/error.hpp"
#include "bootrl/rng.hpp"
#include "bootrl/solver.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace bootrl;

TEST_CASE("trivial value functions") {
  SolverConfig cfg;
  const auto zero = DynamicsModel::from_tables(3, 2, std::vector<double>(6, 0.0), std::vector<double>(18, 1.0 / 3.0), -1, 1);
  const auto vf0 = value_iteration(zero, cfg);
  for (double v : vf0.v) CHECK(v == 0.0);

  cfg.gamma = 0.5;
  const auto one = DynamicsModel::from_tables(1, 1, {1.0}, {1.0}, -1, 1);
  const auto vf1 = value_iteration(one, cfg);
  CHECK(vf1.converged);
  CHECK(vf1.v[0] == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("greedy and worst policies match brute-force enumeration") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = oracle::random_mdp(3, 2, rng);
    SolverConfig cfg;
    cfg.gamma = 0.9;
    cfg.tolerance = 1e-12;
    const auto best = derive_policy(value_iteration(m, cfg, Objective::maximize), PolicyMode::best);
    const auto worst = derive_policy(value_iteration(m, cfg, Objective::minimize), PolicyMode::worst);
    const auto ref = oracle::enumerate_policies(m, cfg.gamma);
    CHECK(best.action_per_state == ref.best);
    CHECK(worst.action_per_state == ref.worst);
    const auto vf = value_iteration(m, cfg);
    for (std::size_t s = 0; s < 3; ++s) CHECK(vf.v[s] == doctest::Approx(ref.v_best[s]).epsilon(1e-8));
  }
}

TEST_CASE("bellman residual and convergence") {
  Rng rng(5);
  const auto m = oracle::random_mdp(4, 3, rng);
  SolverConfig cfg;
  const auto vf = value_iteration(m, cfg);
  CHECK(vf.converged);
  CHECK(vf.bellman_residual < cfg.tolerance);
  cfg.max_iterations = 2;
  CHECK_FALSE(value_iteration(m, cfg).converged);
  SolverConfig bad;
  bad.gamma = 1.0;
  CHECK_THROWS_AS(value_iteration(m, bad), Error);
}

TEST_CASE("derive_policy picks extremes and breaks ties low") {
  ValueFunction vf;
  vf.num_states = 2;
  vf.num_actions = 2;
  vf.v = {0.7, 0.5};
  vf.q = {0.2, 0.7, 0.5, 0.5};
  const auto best = derive_policy(vf, PolicyMode::best);
  const auto worst = derive_policy(vf, PolicyMode::worst);
  CHECK(best.action_per_state == std::vector<int>{1, 0});
  CHECK(worst.action_per_state == std::vector<int>{0, 0});
}

TEST_CASE("adding a constant to rewards leaves policies unchanged") {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    auto m = oracle::random_mdp(4, 3, rng);
    std::vector<double> shifted = m.reward_table();
    for (double& r : shifted) r = r * 0.5 - 0.3;  // keep in range, then compare with the same scaling
    auto base_rewards = m.reward_table();
    for (double& r : base_rewards) r *= 0.5;
    const auto a = DynamicsModel::from_tables(4, 3, base_rewards, m.transition_table(), -1, 1);
    const auto b = DynamicsModel::from_tables(4, 3, shifted, m.transition_table(), -1, 1);
    SolverConfig cfg;
    cfg.tolerance = 1e-12;
    CHECK(derive_policy(value_iteration(a, cfg), PolicyMode::best).action_per_state ==
          derive_policy(value_iteration(b, cfg), PolicyMode::best).action_per_state);
    CHECK(derive_policy(value_iteration(a, cfg, Objective::minimize), PolicyMode::worst).action_per_state ==
          derive_policy(value_iteration(b, cfg, Objective::minimize), PolicyMode::worst).action_per_state);
  }
}

TEST_CASE("serial and parallel solves agree bitwise") {
  Rng rng(9);
  const auto m = oracle::random_mdp(12, 3, rng);
  SolverConfig cfg;
  const auto a = value_iteration(m, cfg, Objective::maximize, Execution::serial);
  const auto b = value_iteration(m, cfg, Objective::maximize, Execution::parallel);
  CHECK(a.v == b.v);
  CHECK(a.q == b.q);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("random and no-learned-dynamics policies") {
  const auto s1 = load_study_spec(bundled_study_path(1));
  const auto r1 = random_policy(s1, 3);
  CHECK(r1.sampling);
  CHECK(r1 == random_policy(s1, 3));
  Rng x(11), y(11);
  for (int i = 0; i < 20; ++i) CHECK(r1.action_for(0, x) == r1.action_for(0, y));

  try {
    no_learned_dynamics_policy(s1, SolverConfig{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unsupported);
  }

  // With flat learned dynamics only "train" earns competency, so it wins in
  // every state.
  const auto prog = test_support::progress();
  const auto nld = no_learned_dynamics_policy(prog, SolverConfig{});
  CHECK(nld.role == PolicyRole::no_learned_dynamics);
  for (int a : nld.action_per_state) CHECK(a == 1);
}

TEST_CASE("planning model sizes") {
  const auto s4 = load_study_spec(bundled_study_path(4));
  const auto truth = DynamicsModel::from_tables(8, 4, std::vector<double>(32, 0.5), std::vector<double>(256, 0.125), 0, 1);
  const auto pm = build_planning_model(s4, truth);
  CHECK(pm.learned_states == 8);
  CHECK(pm.deterministic_states == 625);
  CHECK(pm.mdp.num_states == 8 * 625);
  CHECK_NOTHROW(pm.mdp.check());
}

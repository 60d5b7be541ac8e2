#include <doctest.h>

#include "bootrl/kernels.hpp"
#include "bootrl/solver.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace bootrl;

TEST_CASE("bellman backup: serial and OpenMP agree bitwise") {
  Rng rng(31);
  const auto mdp = TabularMdp::from_dynamics(oracle::random_mdp(40, 5, rng));
  std::vector<double> v(40);
  for (double& x : v) x = rng.uniform();
  for (auto obj : {Objective::maximize, Objective::minimize}) {
    std::vector<double> q1(200), q2(200), n1(40), n2(40);
    const double c1 = kernels::bellman_backup_serial(mdp, 0.9, obj, v, q1, n1);
    const double c2 = kernels::bellman_backup_omp(mdp, 0.9, obj, v, q2, n2);
    CHECK(c1 == c2);
    CHECK(q1 == q2);
    CHECK(n1 == n2);
  }
}

TEST_CASE("rollouts: serial and OpenMP agree bitwise") {
  for (int study : {2, 3, 4}) {
    const auto spec = load_study_spec(bundled_study_path(study));
    const auto truth = make_synthetic_truth(spec, 100 + static_cast<std::uint64_t>(study));
    for (const auto& pol : {random_policy(spec, 5), solve_policy(spec, truth.learned, SolverConfig{})}) {
      std::vector<double> a(64 * 12), b(64 * 12);
      kernels::RolloutJob job{pol, truth, spec, 64, 12, 77};
      kernels::rollout_serial(job, a);
      kernels::rollout_omp(job, b);
      CHECK(a == b);
    }
  }
}

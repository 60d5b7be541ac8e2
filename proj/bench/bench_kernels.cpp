// Serial vs OpenMP timing for the Bellman backup and the user rollouts.
#include <chrono>
#include <cstdio>
#include <vector>

#include "bootrl/execution.hpp"
#include "bootrl/kernels.hpp"
#include "bootrl/simulator.hpp"
#include "bootrl/solver.hpp"
#include "bootrl/study.hpp"

using namespace bootrl;

namespace {

template <typename F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    best = std::min(best, ms);
  }
  return best;
}

}  // namespace

int main() {
  std::printf("threads: %d\n", parallel_threads());
  for (int study : {2, 3, 4}) {
    const StudySpec spec = load_study_spec(bundled_study_path(study));
    SyntheticTruthOptions opts;
    opts.action_gap = 0.3;
    const GroundTruth truth = make_synthetic_truth(spec, 1, opts);
    const PlanningModel pm = build_planning_model(spec, truth.learned);
    const std::size_t n = pm.mdp.num_states;
    std::vector<double> v(n, 0.0), q(n * pm.mdp.num_actions), v_next(n);

    const double serial = best_of(5, [&] {
      for (int i = 0; i < 50; ++i) kernels::bellman_backup_serial(pm.mdp, 0.85, Objective::maximize, v, q, v_next);
    });
    const double omp = best_of(5, [&] {
      for (int i = 0; i < 50; ++i) kernels::bellman_backup_omp(pm.mdp, 0.85, Objective::maximize, v, q, v_next);
    });
    std::printf("%s backup x50 (%zu states, %zu actions): serial %.2f ms, omp %.2f ms\n", spec.study_id.c_str(), n,
                pm.mdp.num_actions, serial, omp);

    const Policy pol = solve_policy(spec, truth.learned, SolverConfig{});
    const kernels::RolloutJob job{pol, truth, spec, 2000, 20, 7};
    std::vector<double> out(job.n_users * job.horizon);
    const double rs = best_of(3, [&] { kernels::rollout_serial(job, out); });
    const double ro = best_of(3, [&] { kernels::rollout_omp(job, out); });
    std::printf("%s rollouts (2000 users x 20 steps): serial %.2f ms, omp %.2f ms\n", spec.study_id.c_str(), rs, ro);
  }
  return 0;
}

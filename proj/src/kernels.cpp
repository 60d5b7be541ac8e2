#include "bootrl/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef BOOTRL_HAVE_OPENMP
#include <omp.h>
#endif

#include "bootrl/hooks.hpp"

namespace bootrl {

int parallel_threads() {
#ifdef BOOTRL_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace kernels {

namespace {

inline double backup_state(const TabularMdp& mdp, double gamma, Objective objective,
                           std::span<const double> v, std::span<double> q, std::size_t s) {
  const std::size_t A = mdp.num_actions;
  double best = 0.0;
  for (std::size_t a = 0; a < A; ++a) {
    const std::size_t sa = s * A + a;
    double future = 0.0;
    for (std::size_t k = mdp.row_begin[sa]; k < mdp.row_begin[sa + 1]; ++k)
      future += mdp.prob[k] * v[mdp.next[k]];
    const double value = mdp.reward[sa] + gamma * future;
    q[sa] = value;
    if (a == 0 || (objective == Objective::maximize ? value > best : value < best)) best = value;
  }
  return best;
}

void simulate_user(const RolloutJob& job, std::size_t user, std::span<double> row) {
  const auto& learned = job.truth.learned;
  const std::size_t D = job.policy.deterministic_states;
  Rng env(derive_seed({job.seed, user, 0}));
  Rng pick(derive_seed({job.seed, job.policy.seed, user, 1}));

  std::size_t s = env.categorical(job.truth.initial_distribution);
  std::vector<double> det = initial_deterministic_state(job.spec);
  for (std::size_t t = 0; t < job.horizon; ++t) {
    const std::size_t d = D > 1 ? abstract_deterministic_state(job.spec, det) : 0;
    const int action = job.policy.action_for(s * D + d, pick);
    const auto c = static_cast<std::size_t>(job.spec.actions[static_cast<std::size_t>(action)].cluster_id);
    const double reward = draw_reward(job.spec, learned.reward(s, c), env);
    const std::size_t next = env.categorical(learned.row(s, c));
    deterministic_step(job.spec.hook, job.spec, det, action, reward);
    row[t] = criterion_value(job.spec.criterion, reward, det);
    s = next;
  }
}

}  // namespace

double bellman_backup_serial(const TabularMdp& mdp, double gamma, Objective objective,
                             std::span<const double> v, std::span<double> q,
                             std::span<double> v_next) {
  double change = 0.0;
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    v_next[s] = backup_state(mdp, gamma, objective, v, q, s);
    change = std::max(change, std::abs(v_next[s] - v[s]));
  }
  return change;
}

double bellman_backup_omp(const TabularMdp& mdp, double gamma, Objective objective,
                          std::span<const double> v, std::span<double> q,
                          std::span<double> v_next) {
  double change = 0.0;
  const auto n = static_cast<long>(mdp.num_states);
#pragma omp parallel for schedule(static) reduction(max : change)
  for (long i = 0; i < n; ++i) {
    const auto s = static_cast<std::size_t>(i);
    v_next[s] = backup_state(mdp, gamma, objective, v, q, s);
    change = std::max(change, std::abs(v_next[s] - v[s]));
  }
  return change;
}

void rollout_serial(const RolloutJob& job, std::span<double> out) {
  for (std::size_t u = 0; u < job.n_users; ++u)
    simulate_user(job, u, out.subspan(u * job.horizon, job.horizon));
}

void rollout_omp(const RolloutJob& job, std::span<double> out) {
  const auto n = static_cast<long>(job.n_users);
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    simulate_user(job, u, out.subspan(u * job.horizon, job.horizon));
  }
}

}  // namespace kernels
}  // namespace bootrl

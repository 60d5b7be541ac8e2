#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "bootrl/simulator.hpp"
#include "bootrl/solver.hpp"

namespace bootrl::kernels {

// One synchronous Bellman backup over all states. Writes q and the new state
// values; returns sup_s |v_next(s) - v(s)|.
double bellman_backup_serial(const TabularMdp& mdp, double gamma, Objective objective,
                             std::span<const double> v, std::span<double> q,
                             std::span<double> v_next);
double bellman_backup_omp(const TabularMdp& mdp, double gamma, Objective objective,
                          std::span<const double> v, std::span<double> q,
                          std::span<double> v_next);

struct RolloutJob {
  const Policy& policy;
  const GroundTruth& truth;
  const StudySpec& spec;
  std::size_t n_users;
  std::size_t horizon;
  std::uint64_t seed;
};

// Every user owns two streams derived from (seed, user): one for the
// environment and one for sampling policies. out is [user][t].
void rollout_serial(const RolloutJob& job, std::span<double> out);
void rollout_omp(const RolloutJob& job, std::span<double> out);

}  // namespace bootrl::kernels

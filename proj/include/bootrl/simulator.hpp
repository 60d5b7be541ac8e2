#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bootrl/dynamics.hpp"
#include "bootrl/execution.hpp"
#include "bootrl/hooks.hpp"
#include "bootrl/solver.hpp"
#include "bootrl/study.hpp"

namespace bootrl {

struct GroundTruth {
  DynamicsModel learned;
  std::vector<double> initial_distribution;  // over learned states

  void validate(const StudySpec& spec) const;
};

// Learned part estimated from the full real set; initial distribution is the
// empirical frequency of sample states (uniform if empty).
GroundTruth ground_truth_from_samples(std::span<const Sample> real, const StudySpec& spec,
                                      double smoothing = 0.0);

struct SyntheticTruthOptions {
  // > 0: action a's rewards centre on midpoint + gap * (a - (A-1)/2), giving
  // actions separated qualities. 0: rewards uniform over the range.
  double action_gap = 0.0;
  // Half-width of the per-state reward jitter when action_gap > 0.
  double state_noise = 0.1;
  // Number of reachable next states per row (0 = all).
  std::size_t support = 0;
  // Same transition row for every action of a state.
  bool action_independent_transitions = false;
};
GroundTruth make_synthetic_truth(const StudySpec& spec, std::uint64_t seed,
                                 const SyntheticTruthOptions& options = {});

// Reward realised by a simulated user: the mean for effort rewards, a
// Bernoulli(mean) completion for completion rewards.
double draw_reward(const StudySpec& spec, double mean, Rng& rng);

// Reward as a person would report it: one of the two integer efforts
// bracketing the mean, chosen so the expectation equals the mean, or a
// Bernoulli(mean) completion.
double draw_reported_reward(const StudySpec& spec, double mean, Rng& rng);

// n samples per action cluster drawn from the truth: states cycle through all
// learned states, actions through the cluster's members.
std::vector<Sample> sample_from_truth(const GroundTruth& truth, const StudySpec& spec,
                                      std::size_t n_per_cluster, std::uint64_t seed,
                                      SampleSource source = SampleSource::real);

struct CriterionSeries {
  std::string label;
  Criterion criterion = Criterion::mean_reward;
  std::size_t timesteps = 0;
  std::size_t instances = 0;  // users, or policies when aggregated
  std::vector<double> mean;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::vector<double> std_error;

  bool operator==(const CriterionSeries&) const = default;
};

// Per-user, per-timestep criterion values, row-major [user][t].
std::vector<double> simulate_users(const Policy& policy, const GroundTruth& truth,
                                   const StudySpec& spec, std::size_t n_users,
                                   std::size_t horizon, std::uint64_t seed,
                                   Execution exec = Execution::parallel);

// Mean over users with a normal-approximation 95% interval (mean +/- 1.96 SE).
CriterionSeries simulate_policy(const Policy& policy, const GroundTruth& truth,
                                const StudySpec& spec, std::size_t n_users, std::size_t horizon,
                                std::uint64_t seed, Execution exec = Execution::parallel);

}  // namespace bootrl

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bootrl/study.hpp"

namespace bootrl {

enum class EstimationStatus { ok, empty_input };

// Reward table and transition tensor over (learned state, action cluster).
// Flat row-major storage: reward index s*A + a, transition index (s*A + a)*S + s'.
class DynamicsModel {
 public:
  DynamicsModel() = default;
  DynamicsModel(std::size_t num_states, std::size_t num_actions, double reward_lo, double reward_hi);

  // Validated construction from explicit tables; rows must sum to 1 within 1e-9.
  static DynamicsModel from_tables(std::size_t num_states, std::size_t num_actions,
                                   std::vector<double> reward, std::vector<double> transition,
                                   double reward_lo, double reward_hi);

  // Rebuilds a model from its serialized parts; validates shapes and rows.
  static DynamicsModel restore(std::size_t num_states, std::size_t num_actions, double reward_lo,
                               double reward_hi, std::vector<double> reward,
                               std::vector<std::int64_t> reward_count, std::vector<double> transition,
                               std::vector<std::int64_t> transition_count,
                               std::vector<std::uint8_t> fallback, EstimationStatus status);

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  double reward_lo() const { return reward_lo_; }
  double reward_hi() const { return reward_hi_; }

  double reward(std::size_t s, std::size_t a) const { return reward_mean_[s * num_actions_ + a]; }
  double& reward(std::size_t s, std::size_t a) { return reward_mean_[s * num_actions_ + a]; }
  std::int64_t reward_count(std::size_t s, std::size_t a) const { return reward_count_[s * num_actions_ + a]; }
  double probability(std::size_t s, std::size_t a, std::size_t next) const {
    return transition_[(s * num_actions_ + a) * num_states_ + next];
  }
  std::int64_t transition_count(std::size_t s, std::size_t a, std::size_t next) const {
    return transition_count_[(s * num_actions_ + a) * num_states_ + next];
  }
  std::span<const double> row(std::size_t s, std::size_t a) const {
    return {transition_.data() + (s * num_actions_ + a) * num_states_, num_states_};
  }
  std::span<double> row(std::size_t s, std::size_t a) {
    return {transition_.data() + (s * num_actions_ + a) * num_states_, num_states_};
  }
  bool is_fallback(std::size_t s, std::size_t a) const { return fallback_[s * num_actions_ + a] != 0; }

  const std::vector<double>& reward_table() const { return reward_mean_; }
  const std::vector<double>& transition_table() const { return transition_; }
  const std::vector<std::int64_t>& reward_counts() const { return reward_count_; }
  const std::vector<std::int64_t>& transition_counts() const { return transition_count_; }
  const std::vector<std::uint8_t>& fallback_flags() const { return fallback_; }

  EstimationStatus status() const { return status_; }

  // Largest |row sum - 1| over all (s, a).
  double max_row_sum_error() const;
  // Throws Error(invariant) when a row does not sum to 1 within tol or holds a
  // negative entry.
  void check_rows(double tol = 1e-9) const;

  bool operator==(const DynamicsModel&) const = default;

 private:
  friend DynamicsModel estimate_dynamics(std::span<const Sample>, const StudySpec&, double);

  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  double reward_lo_ = -1.0;
  double reward_hi_ = 1.0;
  std::vector<double> reward_mean_;
  std::vector<std::int64_t> reward_count_;
  std::vector<double> transition_;
  std::vector<std::int64_t> transition_count_;
  std::vector<std::uint8_t> fallback_;
  EstimationStatus status_ = EstimationStatus::ok;
};

// Empirical reward means and (count + alpha) / (total + alpha*S) transitions.
// Unobserved (s, a) fall back to the reward midpoint and a uniform row and are
// flagged. An empty sample set yields an all-fallback model with
// status() == empty_input.
DynamicsModel estimate_dynamics(std::span<const Sample> samples, const StudySpec& spec,
                                double smoothing = 0.0);

// Constant table equal to the global mean reward; uniform transitions.
DynamicsModel baseline_mean_reward(std::span<const Sample> samples, const StudySpec& spec);
DynamicsModel baseline_equal_probability(const StudySpec& spec);
DynamicsModel baseline_stay_in_state(const StudySpec& spec);

// Per action cluster, min(n_per_action, available) samples drawn uniformly
// without replacement. Generator: for cluster c, an Rng seeded with
// derive_seed({seed, c}) runs a partial Fisher-Yates shuffle over the
// cluster's samples in input order; the first n positions are kept, and the
// output lists clusters in ascending order.
struct OracleDraw {
  std::vector<Sample> samples;
  // Per cluster: requested minus drawn.
  std::vector<std::size_t> shortfall;
};
OracleDraw oracle_subsample(std::span<const Sample> real_samples, const StudySpec& spec,
                            std::size_t n_per_action, std::uint64_t seed);

}  // namespace bootrl

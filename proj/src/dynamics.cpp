#include "bootrl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bootrl/error.hpp"
#include "bootrl/rng.hpp"

namespace bootrl {

DynamicsModel::DynamicsModel(std::size_t num_states, std::size_t num_actions, double reward_lo,
                             double reward_hi)
    : num_states_(num_states),
      num_actions_(num_actions),
      reward_lo_(reward_lo),
      reward_hi_(reward_hi),
      reward_mean_(num_states * num_actions, 0.5 * (reward_lo + reward_hi)),
      reward_count_(num_states * num_actions, 0),
      transition_(num_states * num_actions * num_states, num_states ? 1.0 / num_states : 0.0),
      transition_count_(num_states * num_actions * num_states, 0),
      fallback_(num_states * num_actions, 0) {}

DynamicsModel DynamicsModel::from_tables(std::size_t num_states, std::size_t num_actions,
                                         std::vector<double> reward, std::vector<double> transition,
                                         double reward_lo, double reward_hi) {
  if (reward.size() != num_states * num_actions ||
      transition.size() != num_states * num_actions * num_states)
    throw Error(ErrorKind::invariant, "dynamics tables have the wrong shape");
  DynamicsModel m(num_states, num_actions, reward_lo, reward_hi);
  m.reward_mean_ = std::move(reward);
  m.transition_ = std::move(transition);
  m.check_rows();
  return m;
}

DynamicsModel DynamicsModel::restore(std::size_t num_states, std::size_t num_actions,
                                     double reward_lo, double reward_hi, std::vector<double> reward,
                                     std::vector<std::int64_t> reward_count,
                                     std::vector<double> transition,
                                     std::vector<std::int64_t> transition_count,
                                     std::vector<std::uint8_t> fallback, EstimationStatus status) {
  const std::size_t sa = num_states * num_actions;
  if (reward_count.size() != sa || fallback.size() != sa ||
      transition_count.size() != sa * num_states)
    throw Error(ErrorKind::invariant, "dynamics count tables have the wrong shape");
  DynamicsModel m = from_tables(num_states, num_actions, std::move(reward), std::move(transition),
                                reward_lo, reward_hi);
  m.reward_count_ = std::move(reward_count);
  m.transition_count_ = std::move(transition_count);
  m.fallback_ = std::move(fallback);
  m.status_ = status;
  return m;
}

double DynamicsModel::max_row_sum_error() const {
  double worst = 0.0;
  for (std::size_t s = 0; s < num_states_; ++s)
    for (std::size_t a = 0; a < num_actions_; ++a) {
      auto r = row(s, a);
      worst = std::max(worst, std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0));
    }
  return worst;
}

void DynamicsModel::check_rows(double tol) const {
  for (double p : transition_)
    if (!(p >= 0.0) || !std::isfinite(p))
      throw Error(ErrorKind::invariant, "transition probability is negative or not finite");
  for (double r : reward_mean_)
    if (!std::isfinite(r)) throw Error(ErrorKind::invariant, "reward is not finite");
  if (max_row_sum_error() > tol)
    throw Error(ErrorKind::invariant, "transition row does not sum to 1");
}

DynamicsModel estimate_dynamics(std::span<const Sample> samples, const StudySpec& spec,
                                double smoothing) {
  if (smoothing < 0.0) throw Error(ErrorKind::precondition, "smoothing must be nonnegative");
  const std::size_t S = spec.num_learned_states();
  const std::size_t A = spec.num_clusters();
  DynamicsModel m(S, A, spec.reward.lo, spec.reward.hi);

  std::vector<double> reward_sum(S * A, 0.0);
  for (const Sample& x : samples) {
    validate_sample(x, spec);
    const std::size_t s = encode_state(x.state, spec);
    const std::size_t a = static_cast<std::size_t>(spec.cluster_of(x.action_id));
    const std::size_t next = encode_state(x.next_state, spec);
    reward_sum[s * A + a] += x.reward;
    ++m.reward_count_[s * A + a];
    ++m.transition_count_[(s * A + a) * S + next];
  }

  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      const std::size_t sa = s * A + a;
      const std::int64_t n = m.reward_count_[sa];
      auto row = m.row(s, a);
      if (n == 0) {
        m.reward_mean_[sa] = spec.reward.midpoint();
        std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(S));
        m.fallback_[sa] = 1;
        continue;
      }
      // Clamp guards the last-ulp drift of a long sum of in-range rewards.
      m.reward_mean_[sa] = std::clamp(reward_sum[sa] / static_cast<double>(n), spec.reward.lo, spec.reward.hi);
      const double denom = static_cast<double>(n) + smoothing * static_cast<double>(S);
      for (std::size_t next = 0; next < S; ++next)
        row[next] = (static_cast<double>(m.transition_count_[sa * S + next]) + smoothing) / denom;
    }
  }
  m.status_ = samples.empty() ? EstimationStatus::empty_input : EstimationStatus::ok;
  return m;
}

DynamicsModel baseline_mean_reward(std::span<const Sample> samples, const StudySpec& spec) {
  if (samples.empty())
    throw Error(ErrorKind::precondition, "mean-reward baseline needs at least one sample");
  double sum = 0.0;
  for (const Sample& x : samples) sum += x.reward;
  const double mean = sum / static_cast<double>(samples.size());
  const std::size_t S = spec.num_learned_states();
  const std::size_t A = spec.num_clusters();
  std::vector<double> reward(S * A, mean);
  std::vector<double> transition(S * A * S, 1.0 / static_cast<double>(S));
  return DynamicsModel::from_tables(S, A, std::move(reward), std::move(transition), spec.reward.lo,
                                    spec.reward.hi);
}

DynamicsModel baseline_equal_probability(const StudySpec& spec) {
  const std::size_t S = spec.num_learned_states();
  const std::size_t A = spec.num_clusters();
  return DynamicsModel::from_tables(S, A, std::vector<double>(S * A, spec.reward.midpoint()),
                                    std::vector<double>(S * A * S, 1.0 / static_cast<double>(S)),
                                    spec.reward.lo, spec.reward.hi);
}

DynamicsModel baseline_stay_in_state(const StudySpec& spec) {
  const std::size_t S = spec.num_learned_states();
  const std::size_t A = spec.num_clusters();
  std::vector<double> transition(S * A * S, 0.0);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t a = 0; a < A; ++a) transition[(s * A + a) * S + s] = 1.0;
  return DynamicsModel::from_tables(S, A, std::vector<double>(S * A, spec.reward.midpoint()),
                                    std::move(transition), spec.reward.lo, spec.reward.hi);
}

OracleDraw oracle_subsample(std::span<const Sample> real_samples, const StudySpec& spec,
                            std::size_t n_per_action, std::uint64_t seed) {
  if (n_per_action < 1) throw Error(ErrorKind::precondition, "n_per_action must be >= 1");
  const std::size_t C = spec.num_clusters();
  std::vector<std::vector<std::size_t>> by_cluster(C);
  for (std::size_t i = 0; i < real_samples.size(); ++i)
    by_cluster[static_cast<std::size_t>(spec.cluster_of(real_samples[i].action_id))].push_back(i);

  OracleDraw out;
  out.shortfall.assign(C, 0);
  for (std::size_t c = 0; c < C; ++c) {
    auto& idx = by_cluster[c];
    const std::size_t take = std::min(n_per_action, idx.size());
    out.shortfall[c] = n_per_action - take;
    Rng rng(derive_seed({seed, c}));
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + rng.below(idx.size() - i);
      std::swap(idx[i], idx[j]);
      out.samples.push_back(real_samples[idx[i]]);
    }
  }
  return out;
}

}  // namespace bootrl

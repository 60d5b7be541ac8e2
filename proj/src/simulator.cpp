#include "bootrl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bootrl/error.hpp"
#include "bootrl/kernels.hpp"

namespace bootrl {

std::vector<double> initial_deterministic_state(const StudySpec& spec) {
  return std::vector<double>(spec.hook == DeterministicHook::none ? 0 : spec.num_deterministic_features(), 0.0);
}

void deterministic_step(DeterministicHook hook, const StudySpec& spec, std::vector<double>& det,
                        int action_id, double reward) {
  switch (hook) {
    case DeterministicHook::none:
      return;
    case DeterministicHook::competency: {
      const ActionDef& a = spec.action(action_id);
      if (det.size() != a.contribution.size())
        throw Error(ErrorKind::precondition, "competency state size mismatch");
      const double effort = std::clamp(5.0 * (reward + 1.0), 0.0, 10.0);
      for (std::size_t j = 0; j < det.size(); ++j)
        det[j] = std::min(1.0, det[j] + effort / 10.0 * a.contribution[j]);
      return;
    }
    case DeterministicHook::diversity: {
      const ActionDef& a = spec.action(action_id);
      const auto k = static_cast<std::size_t>(a.strategy.value_or(-1));
      if (k >= det.size()) throw Error(ErrorKind::precondition, "strategy counter out of range");
      if (reward >= 0.5) det[k] += 1.0;
      return;
    }
  }
  throw Error(ErrorKind::invariant, "unknown hook id");
}

std::size_t deterministic_abstraction_size(const StudySpec& spec) {
  if (spec.hook != DeterministicHook::diversity) return 1;
  std::size_t n = 1;
  for (std::size_t k = 0; k < spec.num_deterministic_features(); ++k) n *= kDiversityTarget + 1;
  return n;
}

std::size_t abstract_deterministic_state(const StudySpec& spec, std::span<const double> det) {
  if (spec.hook != DeterministicHook::diversity) return 0;
  std::size_t index = 0;
  std::size_t stride = 1;
  for (double count : det) {
    const auto capped = static_cast<std::size_t>(std::min<double>(count, kDiversityTarget));
    index += capped * stride;
    stride *= kDiversityTarget + 1;
  }
  return index;
}

std::vector<int> counters_from_abstraction(const StudySpec& spec, std::size_t index) {
  std::vector<int> counts(spec.num_deterministic_features(), 0);
  for (auto& c : counts) {
    c = static_cast<int>(index % (kDiversityTarget + 1));
    index /= kDiversityTarget + 1;
  }
  return counts;
}

double criterion_value(Criterion criterion, double reward, std::span<const double> det) {
  switch (criterion) {
    case Criterion::mean_reward:
      return reward;
    case Criterion::competency_fraction: {
      if (det.empty()) return 0.0;
      double sum = 0.0;
      for (double c : det) sum += std::clamp(c, 0.0, 1.0);
      return sum / static_cast<double>(det.size());
    }
    case Criterion::diversity_fraction: {
      if (det.empty()) return 0.0;
      double sum = 0.0;
      for (double c : det) sum += std::min<double>(c, kDiversityTarget);
      return sum / (kDiversityTarget * static_cast<double>(det.size()));
    }
  }
  return 0.0;
}

void GroundTruth::validate(const StudySpec& spec) const {
  if (learned.num_states() != spec.num_learned_states() || learned.num_actions() != spec.num_clusters())
    throw Error(ErrorKind::invariant, "ground truth shape does not match study " + spec.study_id);
  learned.check_rows();
  if (initial_distribution.size() != learned.num_states())
    throw Error(ErrorKind::invariant, "initial distribution has the wrong size");
  double sum = 0.0;
  for (double p : initial_distribution) {
    if (!(p >= 0.0)) throw Error(ErrorKind::invariant, "negative initial probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorKind::invariant, "initial distribution does not sum to 1");
}

GroundTruth ground_truth_from_samples(std::span<const Sample> real, const StudySpec& spec,
                                      double smoothing) {
  GroundTruth truth;
  truth.learned = estimate_dynamics(real, spec, smoothing);
  const std::size_t S = spec.num_learned_states();
  truth.initial_distribution.assign(S, 0.0);
  if (real.empty()) {
    std::fill(truth.initial_distribution.begin(), truth.initial_distribution.end(), 1.0 / static_cast<double>(S));
  } else {
    for (const Sample& x : real) truth.initial_distribution[encode_state(x.state, spec)] += 1.0;
    for (double& p : truth.initial_distribution) p /= static_cast<double>(real.size());
  }
  return truth;
}

GroundTruth make_synthetic_truth(const StudySpec& spec, std::uint64_t seed,
                                 const SyntheticTruthOptions& options) {
  const std::size_t S = spec.num_learned_states();
  const std::size_t A = spec.num_clusters();
  Rng rng(derive_seed({seed, 0x7472757468ULL}));
  const double lo = spec.reward.lo;
  const double hi = spec.reward.hi;

  std::vector<double> reward(S * A);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t a = 0; a < A; ++a) {
      double r;
      if (options.action_gap > 0.0) {
        const double centre = spec.reward.midpoint() +
                              options.action_gap * (static_cast<double>(a) - 0.5 * static_cast<double>(A - 1));
        r = centre + options.state_noise * (2.0 * rng.uniform() - 1.0);
      } else {
        r = lo + (hi - lo) * rng.uniform();
      }
      reward[s * A + a] = std::clamp(r, lo, hi);
    }

  std::vector<double> transition(S * A * S, 0.0);
  auto fill_row = [&](std::span<double> row) {
    const std::size_t k = options.support == 0 ? S : std::min(options.support, S);
    std::vector<std::size_t> order(S);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < k; ++i) std::swap(order[i], order[i + rng.below(S - i)]);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      // Exponential weights give a flat Dirichlet draw.
      const double w = -std::log(1.0 - rng.uniform());
      row[order[i]] = w;
      total += w;
    }
    for (double& p : row) p /= total;
  };
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      std::span<double> row(transition.data() + (s * A + a) * S, S);
      if (options.action_independent_transitions && a > 0) {
        std::span<const double> first(transition.data() + (s * A) * S, S);
        std::copy(first.begin(), first.end(), row.begin());
      } else {
        fill_row(row);
      }
    }
  }
  GroundTruth truth;
  truth.learned = DynamicsModel::from_tables(S, A, std::move(reward), std::move(transition), lo, hi);
  truth.initial_distribution.assign(S, 1.0 / static_cast<double>(S));
  return truth;
}

double draw_reward(const StudySpec& spec, double mean, Rng& rng) {
  if (spec.reward.kind == RewardKind::completion_with_diversity_cost)
    return rng.bernoulli(std::clamp(mean, 0.0, 1.0)) ? 1.0 : 0.0;
  return mean;
}

double draw_reported_reward(const StudySpec& spec, double mean, Rng& rng) {
  if (spec.reward.kind == RewardKind::completion_with_diversity_cost)
    return rng.bernoulli(std::clamp(mean, 0.0, 1.0)) ? 1.0 : 0.0;
  const double effort = std::clamp((mean + 1.0) * 5.0, 0.0, 10.0);
  const double floor = std::floor(effort);
  return map_effort_to_reward(static_cast<int>(floor) + (rng.uniform() < effort - floor ? 1 : 0));
}

std::vector<Sample> sample_from_truth(const GroundTruth& truth, const StudySpec& spec,
                                      std::size_t n_per_cluster, std::uint64_t seed,
                                      SampleSource source) {
  truth.validate(spec);
  const std::size_t S = spec.num_learned_states();
  std::vector<Sample> out;
  for (int c = 0; c < static_cast<int>(spec.num_clusters()); ++c) {
    const auto members = spec.actions_in_cluster(c);
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(c), 0x7265616cULL}));
    for (std::size_t j = 0; j < n_per_cluster; ++j) {
      Sample x;
      const std::size_t s = j % S;
      x.state = decode_state(s, spec);
      x.action_id = members[(j / S) % members.size()];
      x.reward = draw_reported_reward(spec, truth.learned.reward(s, static_cast<std::size_t>(c)), rng);
      x.next_state = decode_state(rng.categorical(truth.learned.row(s, static_cast<std::size_t>(c))), spec);
      x.source = source;
      out.push_back(std::move(x));
    }
  }
  return out;
}

std::vector<double> simulate_users(const Policy& policy, const GroundTruth& truth,
                                   const StudySpec& spec, std::size_t n_users,
                                   std::size_t horizon, std::uint64_t seed, Execution exec) {
  if (n_users < 1 || horizon < 1)
    throw Error(ErrorKind::precondition, "simulation needs n_users >= 1 and horizon >= 1");
  truth.validate(spec);
  const std::size_t D = deterministic_abstraction_size(spec);
  if (policy.num_actions != spec.actions.size() || policy.learned_states != spec.num_learned_states() ||
      policy.deterministic_states != D ||
      (!policy.sampling && policy.action_per_state.size() != spec.num_learned_states() * D))
    throw Error(ErrorKind::precondition, "policy '" + policy.label + "' does not match study " + spec.study_id);
  for (int a : policy.action_per_state)
    if (a < 0 || static_cast<std::size_t>(a) >= spec.actions.size())
      throw Error(ErrorKind::precondition, "policy '" + policy.label + "' names an unknown action");

  std::vector<double> out(n_users * horizon, 0.0);
  const kernels::RolloutJob job{policy, truth, spec, n_users, horizon, seed};
  if (exec == Execution::serial) {
    kernels::rollout_serial(job, out);
  } else {
    kernels::rollout_omp(job, out);
  }
  return out;
}

CriterionSeries simulate_policy(const Policy& policy, const GroundTruth& truth,
                                const StudySpec& spec, std::size_t n_users, std::size_t horizon,
                                std::uint64_t seed, Execution exec) {
  const std::vector<double> values = simulate_users(policy, truth, spec, n_users, horizon, seed, exec);
  CriterionSeries series;
  series.label = policy.label;
  series.criterion = spec.criterion;
  series.timesteps = horizon;
  series.instances = n_users;
  series.mean.resize(horizon);
  series.ci_low.resize(horizon);
  series.ci_high.resize(horizon);
  series.std_error.resize(horizon);
  const double n = static_cast<double>(n_users);
  for (std::size_t t = 0; t < horizon; ++t) {
    double sum = 0.0;
    for (std::size_t u = 0; u < n_users; ++u) sum += values[u * horizon + t];
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t u = 0; u < n_users; ++u) {
      const double d = values[u * horizon + t] - mean;
      ss += d * d;
    }
    const double se = n_users > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    series.mean[t] = mean;
    series.std_error[t] = se;
    series.ci_low[t] = mean - 1.96 * se;
    series.ci_high[t] = mean + 1.96 * se;
  }
  return series;
}

}  // namespace bootrl

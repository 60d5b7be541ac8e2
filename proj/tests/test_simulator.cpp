#include <doctest.h>

#include <cmath>

#include "bootrl/error.hpp"
#include "bootrl/hooks.hpp"
#include "bootrl/simulator.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace bootrl;

namespace {

Policy fixed_policy(const StudySpec& spec, std::vector<int> actions) {
  Policy p;
  p.label = "fixed";
  p.action_per_state = std::move(actions);
  p.num_actions = spec.actions.size();
  p.learned_states = spec.num_learned_states();
  p.deterministic_states = 1;
  return p;
}

// Expected per-step reward under a fixed policy: mu_0 P^t r.
std::vector<double> expected_rewards(const GroundTruth& truth, const std::vector<int>& pi, std::size_t horizon) {
  const auto& m = truth.learned;
  const std::size_t S = m.num_states();
  std::vector<double> mu = truth.initial_distribution, out;
  for (std::size_t t = 0; t < horizon; ++t) {
    double r = 0.0;
    for (std::size_t s = 0; s < S; ++s) r += mu[s] * m.reward(s, static_cast<std::size_t>(pi[s]));
    out.push_back(r);
    std::vector<double> next(S, 0.0);
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t t2 = 0; t2 < S; ++t2) next[t2] += mu[s] * m.probability(s, static_cast<std::size_t>(pi[s]), t2);
    mu = next;
  }
  return out;
}

}  // namespace

TEST_CASE("simulated means follow the state distribution") {
  const auto spec = test_support::tiny4();
  const auto truth = make_synthetic_truth(spec, 12);
  const std::vector<int> pi{0, 1, 1, 0};
  const auto series = simulate_policy(fixed_policy(spec, pi), truth, spec, 20000, 6, 3);
  const auto expected = expected_rewards(truth, pi, 6);
  for (std::size_t t = 0; t < 6; ++t) {
    CHECK(std::abs(series.mean[t] - expected[t]) < 4.0 * series.std_error[t] + 1e-12);
    CHECK(series.ci_low[t] == doctest::Approx(series.mean[t] - 1.96 * series.std_error[t]));
    CHECK(series.ci_high[t] == doctest::Approx(series.mean[t] + 1.96 * series.std_error[t]));
  }
}

TEST_CASE("simulation is reproducible and rejects bad arguments") {
  const auto spec = test_support::tiny4();
  const auto truth = make_synthetic_truth(spec, 4);
  const auto pol = fixed_policy(spec, {1, 1, 0, 0});
  CHECK(simulate_users(pol, truth, spec, 50, 7, 9) == simulate_users(pol, truth, spec, 50, 7, 9));
  CHECK(simulate_users(pol, truth, spec, 50, 7, 9, Execution::serial) ==
        simulate_users(pol, truth, spec, 50, 7, 9, Execution::parallel));
  CHECK_THROWS_AS(simulate_users(pol, truth, spec, 0, 7, 9), Error);
  CHECK_THROWS_AS(simulate_users(pol, truth, spec, 5, 0, 9), Error);
  CHECK_THROWS_AS(simulate_users(fixed_policy(spec, {0, 0}), truth, spec, 5, 5, 9), Error);
}

TEST_CASE("competency update") {
  const auto spec = test_support::progress();
  std::vector<double> det = initial_deterministic_state(spec);
  REQUIRE(det.size() == 1);
  deterministic_step(spec.hook, spec, det, 1, 0.0);  // effort 5 -> +0.25
  CHECK(det[0] == doctest::Approx(0.25));
  deterministic_step(spec.hook, spec, det, 0, 1.0);  // rest builds nothing
  CHECK(det[0] == doctest::Approx(0.25));
  deterministic_step(spec.hook, spec, det, 1, 1.0);  // +0.5
  CHECK(det[0] == doctest::Approx(0.75));
  deterministic_step(spec.hook, spec, det, 1, 1.0);
  CHECK(det[0] == 1.0);
  CHECK(criterion_value(Criterion::competency_fraction, 0.3, det) == 1.0);
}

TEST_CASE("diversity counters and criterion") {
  const auto spec = load_study_spec(bundled_study_path(4));
  std::vector<double> det = initial_deterministic_state(spec);
  REQUIRE(det.size() == 4);
  int strat0 = -1;
  for (const auto& a : spec.actions)
    if (a.strategy == 0) {
      strat0 = a.id;
      break;
    }
  REQUIRE(strat0 >= 0);
  deterministic_step(spec.hook, spec, det, strat0, 0.0);
  CHECK(det[0] == 0.0);
  for (int i = 0; i < 6; ++i) deterministic_step(spec.hook, spec, det, strat0, 1.0);
  CHECK(det[0] == 6.0);
  // Counters past the target count as covered once.
  CHECK(criterion_value(Criterion::diversity_fraction, 0.0, det) == doctest::Approx(4.0 / 16.0));
  CHECK(abstract_deterministic_state(spec, det) == 4);
  CHECK(counters_from_abstraction(spec, 4) == std::vector<int>{4, 0, 0, 0});
  CHECK(deterministic_abstraction_size(spec) == 625);
  CHECK(criterion_value(Criterion::mean_reward, 0.42, det) == 0.42);
}

TEST_CASE("reported rewards are unbiased integer efforts") {
  const auto spec = test_support::tiny4();
  Rng rng(8);
  const double mean = 0.23;  // effort 6.15
  double sum = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const double r = draw_reported_reward(spec, mean, rng);
    const double effort = (r + 1.0) * 5.0;
    CHECK(std::abs(effort - std::round(effort)) < 1e-9);
    CHECK((std::round(effort) == 6.0 || std::round(effort) == 7.0));
    sum += r;
  }
  CHECK(std::abs(sum / n - mean) < 0.005);
}

TEST_CASE("samples from the truth") {
  const auto spec = test_support::tiny4();
  const auto truth = make_synthetic_truth(spec, 2, {.action_gap = 0.4, .state_noise = 0.05, .support = 2});
  const auto xs = sample_from_truth(truth, spec, 8, 1);
  CHECK(xs.size() == 16);
  for (const auto& x : xs) CHECK_NOTHROW(validate_sample(x, spec));
  CHECK(xs == sample_from_truth(truth, spec, 8, 1));
  for (std::size_t s = 0; s < 4; ++s) {
    std::size_t nonzero = 0;
    for (std::size_t t = 0; t < 4; ++t) nonzero += truth.learned.probability(s, 0, t) > 0.0;
    CHECK(nonzero == 2);
  }
  const auto empirical = ground_truth_from_samples(xs, spec);
  CHECK_NOTHROW(empirical.validate(spec));
  for (double p : empirical.initial_distribution) CHECK(p == doctest::Approx(0.25));
}

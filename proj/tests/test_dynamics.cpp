#include <doctest.h>

#include <algorithm>

#include "bootrl/dynamics.hpp"
#include "bootrl/error.hpp"
#include "bootrl/rng.hpp"
#include "test_support.hpp"

using namespace bootrl;
using test_support::sample;

TEST_CASE("single sample and means") {
  const auto spec = test_support::tiny4();
  const std::vector<Sample> one{sample({0, 1}, 1, 0.6, {1, 1})};
  const auto m = estimate_dynamics(one, spec);
  const auto s = encode_state(State{{0, 1}}, spec);
  const auto t = encode_state(State{{1, 1}}, spec);
  CHECK(m.reward(s, 1) == doctest::Approx(0.6));
  CHECK(m.probability(s, 1, t) == 1.0);
  CHECK_FALSE(m.is_fallback(s, 1));
  CHECK(m.is_fallback(s, 0));
  CHECK(m.reward(s, 0) == 0.0);  // midpoint of [-1, 1]
  for (std::size_t n = 0; n < 4; ++n) CHECK(m.probability(s, 0, n) == 0.25);

  const std::vector<Sample> two{sample({0, 0}, 0, 0.2, {0, 0}), sample({0, 0}, 0, 0.6, {0, 0})};
  CHECK(estimate_dynamics(two, spec).reward(0, 0) == doctest::Approx(0.4));
}

TEST_CASE("transition frequencies and smoothing") {
  const auto spec = test_support::tiny4();
  const std::vector<Sample> xs{sample({0, 0}, 0, 0.0, {1, 0}), sample({0, 0}, 0, 0.0, {1, 0}),
                               sample({0, 0}, 0, 0.0, {0, 1})};
  const auto m = estimate_dynamics(xs, spec);
  const auto x = encode_state(State{{1, 0}}, spec);
  const auto y = encode_state(State{{0, 1}}, spec);
  CHECK(m.probability(0, 0, x) == doctest::Approx(2.0 / 3.0));
  CHECK(m.probability(0, 0, y) == doctest::Approx(1.0 / 3.0));
  CHECK(m.transition_count(0, 0, x) == 2);

  const auto smoothed = estimate_dynamics(xs, spec, 1.0);
  // (count + 1) / (3 + 4)
  CHECK(smoothed.probability(0, 0, x) == doctest::Approx(3.0 / 7.0));
  CHECK(smoothed.probability(0, 0, 0) == doctest::Approx(1.0 / 7.0));
  CHECK(smoothed.max_row_sum_error() < 1e-12);
}

TEST_CASE("empty input is flagged, not an error") {
  const auto spec = test_support::tiny4();
  const auto m = estimate_dynamics({}, spec);
  CHECK(m.status() == EstimationStatus::empty_input);
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t a = 0; a < 2; ++a) CHECK(m.is_fallback(s, a));
}

TEST_CASE("deterministic truth is recovered exactly") {
  const auto spec = test_support::tiny4();
  std::vector<Sample> xs;
  for (int s = 0; s < 4; ++s)
    for (int a = 0; a < 2; ++a)
      for (int rep = 0; rep < 3; ++rep) {
        const State st = decode_state(static_cast<std::size_t>(s), spec);
        xs.push_back(sample(st.values, a, (s - a) / 4.0, decode_state(static_cast<std::size_t>((s + a + 1) % 4), spec).values));
      }
  const auto m = estimate_dynamics(xs, spec);
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t a = 0; a < 2; ++a) {
      CHECK(m.reward(s, a) == (static_cast<double>(s) - static_cast<double>(a)) / 4.0);
      CHECK(m.probability(s, a, (s + a + 1) % 4) == 1.0);
      CHECK_FALSE(m.is_fallback(s, a));
    }
}

TEST_CASE("baselines") {
  const auto spec = test_support::tiny4();
  const std::vector<Sample> sym{sample({0, 0}, 0, -1.0, {0, 0}), sample({1, 1}, 1, 1.0, {0, 0})};
  const auto mr = baseline_mean_reward(sym, spec);
  for (double r : mr.reward_table()) CHECK(r == 0.0);

  const std::vector<Sample> three{sample({0, 0}, 0, 0.2, {0, 0}), sample({0, 0}, 1, 0.2, {0, 0}),
                                  sample({1, 0}, 0, 0.8, {0, 0})};
  const auto m3 = baseline_mean_reward(three, spec);
  for (double r : m3.reward_table()) CHECK(r == doctest::Approx(0.4));
  const std::vector<Sample> single{sample({0, 0}, 0, 0.6, {0, 0})};
  const auto m1 = baseline_mean_reward(single, spec);
  for (double r : m1.reward_table()) CHECK(r == doctest::Approx(0.6));
  CHECK_THROWS_AS(baseline_mean_reward({}, spec), Error);

  for (int n = 1; n <= 4; ++n) {
    const auto s = load_study_spec(bundled_study_path(n));
    const auto eq = baseline_equal_probability(s);
    const auto stay = baseline_stay_in_state(s);
    const double S = static_cast<double>(s.num_learned_states());
    for (std::size_t st = 0; st < s.num_learned_states(); ++st)
      for (std::size_t a = 0; a < s.num_clusters(); ++a)
        for (std::size_t t = 0; t < s.num_learned_states(); ++t) {
          CHECK(eq.probability(st, a, t) == 1.0 / S);
          CHECK(stay.probability(st, a, t) == (st == t ? 1.0 : 0.0));
        }
    CHECK_NOTHROW(eq.check_rows());
    CHECK_NOTHROW(stay.check_rows());
  }
}

TEST_CASE("oracle subsample follows the documented generator") {
  const auto spec = test_support::tiny4();
  std::vector<Sample> real;
  for (int i = 0; i < 5; ++i) real.push_back(sample({0, 0}, 0, i / 10.0, {0, 0}));  // tagged by reward
  for (int i = 0; i < 3; ++i) real.push_back(sample({1, 1}, 1, -i / 10.0, {1, 1}));

  const auto draw = oracle_subsample(real, spec, 2, 42);
  REQUIRE(draw.samples.size() == 4);
  // Reference: per cluster c, Rng(derive_seed({seed, c})) runs a partial
  // Fisher-Yates over the cluster's samples in input order.
  std::vector<double> expected;
  for (int c = 0; c < 2; ++c) {
    std::vector<double> pool;
    for (const auto& x : real)
      if (x.action_id == c) pool.push_back(x.reward);
    Rng rng(derive_seed({42, static_cast<std::uint64_t>(c)}));
    for (std::size_t j = 0; j < 2; ++j) {
      std::swap(pool[j], pool[j + rng.below(pool.size() - j)]);
      expected.push_back(pool[j]);
    }
  }
  for (std::size_t i = 0; i < 4; ++i) CHECK(draw.samples[i].reward == expected[i]);
  CHECK(draw.shortfall == std::vector<std::size_t>{0, 0});

  const auto again = oracle_subsample(real, spec, 2, 42);
  CHECK(again.samples == draw.samples);

  const auto all = oracle_subsample(real, spec, 5, 1);
  CHECK(all.samples.size() == 8);
  CHECK(all.shortfall == std::vector<std::size_t>{0, 2});
  std::vector<double> got, want;
  for (const auto& x : all.samples) got.push_back(x.reward);
  for (const auto& x : real) want.push_back(x.reward);
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  CHECK(got == want);
}

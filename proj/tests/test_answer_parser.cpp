#include <doctest.h>

#include "bootrl/answer_parser.hpp"
#include "bootrl/prompts.hpp"
#include "corpus.hpp"
#include "test_support.hpp"

using namespace bootrl;

TEST_CASE("parser corpus") {
  const auto outcomes = corpus::run(test_support::data_dir() / "parser_corpus");
  CHECK(outcomes.size() == 54);
  int malformed = 0;
  for (const auto& o : outcomes) {
    INFO(o.item.file << " expected " << o.item.expected << " got " << o.got);
    CHECK(o.ok);
    malformed += o.item.file.rfind("malformed_", 0) == 0;
  }
  CHECK(malformed == 30);
}

TEST_CASE("long example answers") {
  const auto s3 = load_study_spec(bundled_study_path(3));
  const auto dir = test_support::data_dir() / "parser_corpus";
  const auto r = parse_reward(corpus::read_file(dir / "cot_reward_example.txt"), s3);
  CHECK(r.raw == 8);
  CHECK(r.reward == doctest::Approx(0.6));
  const auto n = parse_next_state(corpus::read_file(dir / "cot_next_state_example.txt"), s3);
  CHECK(n.raw == std::vector<int>{4, 5, 7});
  CHECK(n.state.values.size() == 3);
}

TEST_CASE("effort maps onto the reward range") {
  const auto s3 = load_study_spec(bundled_study_path(3));
  CHECK(parse_reward("effort: 0", s3).reward == -1.0);
  CHECK(parse_reward("effort: 5", s3).reward == 0.0);
  CHECK(parse_reward("effort: 10", s3).reward == 1.0);
}

TEST_CASE("next state values are binned") {
  const auto spec = test_support::tiny4();
  const auto a = parse_next_state("[5, 6]", spec);
  CHECK(a.state.values == std::vector<int>{0, 1});
}

TEST_CASE("formatted answers round-trip") {
  for (int n = 1; n <= 4; ++n) {
    const auto spec = load_study_spec(bundled_study_path(n));
    if (spec.reward.kind == RewardKind::completion_with_diversity_cost) {
      for (double r : {0.0, 1.0}) CHECK(parse_reward(format_reward_answer(spec, r), spec).reward == r);
    } else {
      for (int e = 0; e <= 10; ++e) {
        const double r = map_effort_to_reward(e);
        CHECK(parse_reward(format_reward_answer(spec, r), spec).raw == e);
      }
    }
    for (std::size_t s = 0; s < spec.num_learned_states(); ++s) {
      const State st = decode_state(s, spec);
      const auto raws = representative_raws(st, spec);
      CHECK(parse_next_state(format_next_state_answer(raws), spec).state == st);
    }
  }
}

#include <doctest.h>

#include "bootrl/error.hpp"
#include "bootrl/prompts.hpp"
#include "test_support.hpp"

using namespace bootrl;
using test_support::sample;

namespace {

const char* kStateLines =
    "- How good your mood is: 3 (scale 0 to 10)\n"
    "- How much time you have: 8 (scale 0 to 10)";

}  // namespace

TEST_CASE("template names and loading") {
  CHECK(template_file_name("study3", QuestionKind::reward, PromptLength::base, PromptStyle::plain, 1) ==
        "study3_reward_base_plain_v01.txt");
  CHECK(template_file_name("study4", QuestionKind::next_state, PromptLength::extensive, PromptStyle::cot, 10) ==
        "study4_next_ext_cot_v10.txt");
  const auto spec = test_support::tiny4();
  CHECK_THROWS_AS(load_template(spec, QuestionKind::reward, PromptLength::base, PromptStyle::plain, 0), Error);
  CHECK_THROWS_AS(load_template(spec, QuestionKind::reward, PromptLength::base, PromptStyle::plain, 11), Error);
  const auto s4 = load_study_spec(bundled_study_path(4));
  CHECK_THROWS_AS(load_template(s4, QuestionKind::reward, PromptLength::base, PromptStyle::plain, 1), Error);
}

TEST_CASE("every bundled template loads") {
  for (int n = 1; n <= 4; ++n) {
    const auto spec = load_study_spec(bundled_study_path(n));
    PromptLibrary lib(spec);
    int count = 0;
    for (auto kind : {QuestionKind::reward, QuestionKind::next_state})
      for (auto length : spec.prompt_lengths)
        for (auto style : {PromptStyle::plain, PromptStyle::cot})
          for (int v = 1; v <= 10; ++v) {
            CHECK_NOTHROW(lib.get(kind, length, style, v));
            ++count;
          }
    CHECK(count == 40 * static_cast<int>(spec.prompt_lengths.size()));
  }
}

TEST_CASE("golden render without examples") {
  const auto spec = test_support::tiny4();
  const auto tpl = load_template(spec, QuestionKind::reward, PromptLength::base, PromptStyle::plain, 1);
  State s;
  s.values = {0, 1};
  const std::string expected = std::string("Variant 01.\nState:\n") + kStateLines +
                               "\nAction: a reminder\n\n"
                               "How much effort would you spend (0 to 10)? Answer as 'effort: N'.\n";
  CHECK(render_prompt(tpl, s, spec.action(0), {}, spec) == expected);
}

TEST_CASE("extensive prompts carry the full action text") {
  const auto spec = test_support::tiny4();
  const auto tpl = load_template(spec, QuestionKind::reward, PromptLength::extensive, PromptStyle::plain, 2);
  State s;
  s.values = {0, 1};
  const std::string expected = std::string("Variant 02.\nState:\n") + kStateLines +
                               "\nAction: a planning exercise\nAn exercise in which you plan your week.\n\n"
                               "How much effort would you spend (0 to 10)? Answer as 'effort: N'.\n";
  CHECK(render_prompt(tpl, s, spec.action(1), {}, spec) == expected);
}

TEST_CASE("few-shot stanzas") {
  const auto spec = test_support::tiny4();
  State s;
  s.values = {0, 1};
  const std::vector<Sample> shots{sample({1, 1}, 0, 0.6, {0, 0}), sample({0, 0}, 0, -1.0, {1, 0}),
                                  sample({1, 0}, 0, 0.0, {1, 1})};
  const auto reward_tpl = load_template(spec, QuestionKind::reward, PromptLength::base, PromptStyle::plain, 1);
  const std::string reward_expected =
      std::string("Variant 01.\nState:\n") + kStateLines +
      "\nAction: a reminder\n\n"
      "Here are examples of what real users in the same situation reported:\n\n"
      "Example 1:\n- How good your mood is: 8 (scale 0 to 10)\n- How much time you have: 8 (scale 0 to 10)\n"
      "Answer: effort: 8\n\n"
      "Example 2:\n- How good your mood is: 3 (scale 0 to 10)\n- How much time you have: 3 (scale 0 to 10)\n"
      "Answer: effort: 0\n\n"
      "Example 3:\n- How good your mood is: 8 (scale 0 to 10)\n- How much time you have: 3 (scale 0 to 10)\n"
      "Answer: effort: 5\n\n"
      "How much effort would you spend (0 to 10)? Answer as 'effort: N'.\n";
  CHECK(render_prompt(reward_tpl, s, spec.action(0), shots, spec) == reward_expected);

  const auto next_tpl = load_template(spec, QuestionKind::next_state, PromptLength::base, PromptStyle::plain, 1);
  const auto text = render_prompt(next_tpl, s, spec.action(0), shots, spec);
  CHECK(text.find("Answer: [3, 3]\n\nExample 2:") != std::string::npos);
  CHECK(text.find("Answer: [8, 3]\n\nExample 3:") != std::string::npos);
  CHECK(text.find("Answer: [8, 8]\n\nWhat will") != std::string::npos);

  const std::vector<Sample> foreign{sample({1, 1}, 1, 0.6, {0, 0})};
  try {
    render_prompt(reward_tpl, s, spec.action(0), foreign, spec);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::precondition);
  }
}

TEST_CASE("answer formatting") {
  const auto spec = test_support::tiny4();
  CHECK(format_reward_answer(spec, 0.6) == "effort: 8");
  CHECK(format_reward_answer(spec, -1.0) == "effort: 0");
  const std::vector<int> raws{4, 5, 7};
  CHECK(format_next_state_answer(raws) == "[4, 5, 7]");
  const auto s4 = load_study_spec(bundled_study_path(4));
  CHECK(format_reward_answer(s4, 1.0) == "completed: yes");
  CHECK(format_reward_answer(s4, 0.0) == "completed: no");
}

TEST_CASE("raw states are range checked") {
  const auto spec = test_support::tiny4();
  const auto tpl = load_template(spec, QuestionKind::reward, PromptLength::base, PromptStyle::plain, 1);
  const std::vector<int> bad{3, 11};
  CHECK_THROWS_AS(render_prompt_raw(tpl, bad, spec.action(0), {}, spec), Error);
  const std::vector<int> ok{0, 10};
  CHECK(render_prompt_raw(tpl, ok, spec.action(0), {}, spec).find(": 10 (scale 0 to 10)") != std::string::npos);
}

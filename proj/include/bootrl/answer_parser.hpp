#pragma once

#include <string_view>
#include <vector>

#include "bootrl/error.hpp"
#include "bootrl/study.hpp"

namespace bootrl {

// The only ways a completion can fail to parse. Campaigns resample on any of
// them; nothing is ever replaced by a default value.
enum class AnswerError { no_answer, wrong_length, out_of_range };

std::string_view to_string(AnswerError e);

class AnswerParseError : public Error {
 public:
  AnswerParseError(AnswerError kind, const std::string& message)
      : Error(ErrorKind::parse, message), answer_error_(kind) {}
  AnswerError answer_error() const noexcept { return answer_error_; }

 private:
  AnswerError answer_error_;
};

struct RewardAnswer {
  double reward = 0.0;  // mapped into the study's reward range
  int raw = 0;          // effort 0..10, or 1/0 for completed yes/no
};

struct NextStateAnswer {
  std::vector<int> raw;  // prompt-scale values as answered
  State state;           // binned
};

// Effort studies accept "effort: N" (any case; the last well-formed one wins),
// a boxed integer, or a bare integer as the whole text or its last line.
// Completion studies accept "completed: yes|no" (also "completion",
// "answer") or a bare yes/no.
RewardAnswer parse_reward(std::string_view text, const StudySpec& spec);

// Accepts bracketed integer lists, including \boxed{[...]}; the last list
// with the right length and in-range values wins. Values are binned per
// feature.
NextStateAnswer parse_next_state(std::string_view text, const StudySpec& spec);

}  // namespace bootrl

#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "bootrl/study.hpp"

namespace bootrl {

enum class QuestionKind { reward, next_state };

std::string_view to_string(QuestionKind kind);

// One prompt asset. The body uses {{state}}, {{action}}, {{action_text}} and
// {{examples}} placeholders.
struct PromptTemplate {
  std::string study_id;
  QuestionKind kind = QuestionKind::reward;
  PromptLength length = PromptLength::base;
  PromptStyle style = PromptStyle::plain;
  int variant = 1;
  std::string body;
};

// study3_reward_base_plain_v01.txt
std::string template_file_name(const std::string& study_id, QuestionKind kind, PromptLength length,
                               PromptStyle style, int variant);

PromptTemplate load_template(const StudySpec& spec, QuestionKind kind, PromptLength length,
                             PromptStyle style, int variant);

// Caches templates loaded from the study's prompt directory. Thread-safe.
class PromptLibrary {
 public:
  explicit PromptLibrary(const StudySpec& spec) : spec_(spec) {}

  const PromptTemplate& get(QuestionKind kind, PromptLength length, PromptStyle style, int variant);

 private:
  const StudySpec& spec_;
  std::mutex mu_;
  std::map<std::tuple<int, int, int, int>, PromptTemplate> cache_;
};

// Prompt-scale values for a binned state (bin midpoints).
std::vector<int> representative_raws(const State& state, const StudySpec& spec);

// "effort: 8" for effort rewards, "completed: yes" / "completed: no" for
// completion rewards.
std::string format_reward_answer(const StudySpec& spec, double reward);
// "[4, 5, 7]"
std::string format_next_state_answer(std::span<const int> raws);

// Substitutes the placeholders. The state is shown through representative
// raw values; extensive prompts add the action's full text; each few-shot
// sample becomes one "Example i" stanza in draw order, answered in the
// template's output format. Few-shot samples must share the action's cluster.
std::string render_prompt(const PromptTemplate& tpl, const State& state, const ActionDef& action,
                          std::span<const Sample> few_shot, const StudySpec& spec);
// Same, with the state given directly on the prompt scale.
std::string render_prompt_raw(const PromptTemplate& tpl, std::span<const int> raw_state,
                              const ActionDef& action, std::span<const Sample> few_shot,
                              const StudySpec& spec);

}  // namespace bootrl

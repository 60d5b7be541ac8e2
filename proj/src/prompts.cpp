#include "bootrl/prompts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bootrl/error.hpp"

namespace bootrl {

std::string_view to_string(QuestionKind kind) {
  return kind == QuestionKind::reward ? "reward" : "next";
}

std::string template_file_name(const std::string& study_id, QuestionKind kind, PromptLength length,
                               PromptStyle style, int variant) {
  char v[8];
  std::snprintf(v, sizeof v, "%02d", variant);
  return study_id + "_" + std::string(to_string(kind)) + "_" +
         (length == PromptLength::base ? "base" : "ext") + "_" + std::string(to_string(style)) +
         "_v" + v + ".txt";
}

PromptTemplate load_template(const StudySpec& spec, QuestionKind kind, PromptLength length,
                             PromptStyle style, int variant) {
  if (variant < 1 || variant > 10)
    throw Error(ErrorKind::out_of_range, "prompt variant " + std::to_string(variant) + " outside 1..10");
  bool offered = false;
  for (auto l : spec.prompt_lengths) offered = offered || l == length;
  if (!offered)
    throw Error(ErrorKind::precondition, "study " + spec.study_id + " has no " +
                                             std::string(to_string(length)) + " prompts");
  const auto path = spec.prompt_dir / template_file_name(spec.study_id, kind, length, style, variant);
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::missing_input, "missing prompt template " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  PromptTemplate tpl{spec.study_id, kind, length, style, variant, ss.str()};
  for (const char* required : {"{{state}}", "{{action}}"})
    if (tpl.body.find(required) == std::string::npos)
      throw Error(ErrorKind::invariant, path.string() + " lacks placeholder " + required);
  return tpl;
}

const PromptTemplate& PromptLibrary::get(QuestionKind kind, PromptLength length, PromptStyle style,
                                         int variant) {
  std::lock_guard lock(mu_);
  const auto key = std::make_tuple(static_cast<int>(kind), static_cast<int>(length),
                                   static_cast<int>(style), variant);
  auto it = cache_.find(key);
  if (it == cache_.end()) it = cache_.emplace(key, load_template(spec_, kind, length, style, variant)).first;
  return it->second;
}

std::vector<int> representative_raws(const State& state, const StudySpec& spec) {
  validate_state(state, spec);
  std::vector<int> raws;
  for (std::size_t k = 0; k < state.values.size(); ++k)
    raws.push_back(representative_raw(spec.learned_feature(k), state.values[k]));
  return raws;
}

std::string format_reward_answer(const StudySpec& spec, double reward) {
  if (spec.reward.kind == RewardKind::completion_with_diversity_cost)
    return reward >= 0.5 ? "completed: yes" : "completed: no";
  return "effort: " + std::to_string(reward_to_effort(reward));
}

std::string format_next_state_answer(std::span<const int> raws) {
  std::string out = "[";
  for (std::size_t i = 0; i < raws.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(raws[i]);
  }
  return out + "]";
}

namespace {

std::string render_state_lines(std::span<const int> raws, const StudySpec& spec) {
  std::string out;
  for (std::size_t k = 0; k < raws.size(); ++k) {
    if (k) out += "\n";
    const FeatureDef& f = spec.learned_feature(k);
    const auto [lo, hi] = f.raw_scale.value();
    out += "- " + f.question + ": " + std::to_string(raws[k]) + " (scale " + std::to_string(lo) + " to " +
           std::to_string(hi) + ")";
  }
  return out;
}

std::string render_examples(const PromptTemplate& tpl, std::span<const Sample> few_shot,
                            const StudySpec& spec) {
  if (few_shot.empty()) return {};
  std::string out = "Here are examples of what real users in the same situation reported:";
  for (std::size_t i = 0; i < few_shot.size(); ++i) {
    const Sample& x = few_shot[i];
    out += "\n\nExample " + std::to_string(i + 1) + ":\n";
    out += render_state_lines(representative_raws(x.state, spec), spec);
    out += "\nAnswer: ";
    if (tpl.kind == QuestionKind::reward) {
      out += format_reward_answer(spec, x.reward);
    } else {
      const auto raws = representative_raws(x.next_state, spec);
      out += format_next_state_answer(raws);
    }
  }
  return out;
}

// Replaces every {{name}}; a placeholder alone on its line whose value is
// empty removes the whole line.
std::string substitute(const std::string& body, const std::map<std::string, std::string>& values,
                       const std::string& where) {
  std::string out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    const std::size_t open = body.find("{{", pos);
    if (open == std::string::npos) {
      out.append(body, pos, std::string::npos);
      break;
    }
    const std::size_t close = body.find("}}", open + 2);
    if (close == std::string::npos) throw Error(ErrorKind::invariant, where + ": unterminated placeholder");
    const std::string name = body.substr(open + 2, close - open - 2);
    auto it = values.find(name);
    if (it == values.end()) throw Error(ErrorKind::invariant, where + ": no value for placeholder {{" + name + "}}");
    out.append(body, pos, open - pos);
    const bool line_start = open == 0 || body[open - 1] == '\n';
    const bool line_end = close + 2 == body.size() || body[close + 2] == '\n';
    if (it->second.empty() && line_start && line_end) {
      pos = close + 2 < body.size() ? close + 3 : close + 2;
      // Blank line above and below: keep only one of them.
      const bool blank_above = out.size() >= 2 && out.compare(out.size() - 2, 2, "\n\n") == 0;
      if (blank_above && pos < body.size() && body[pos] == '\n') ++pos;
      continue;
    }
    out += it->second;
    pos = close + 2;
  }
  return out;
}

}  // namespace

std::string render_prompt_raw(const PromptTemplate& tpl, std::span<const int> raw_state,
                              const ActionDef& action, std::span<const Sample> few_shot,
                              const StudySpec& spec) {
  if (raw_state.size() != spec.num_learned_features())
    throw Error(ErrorKind::precondition, "state has the wrong number of values for " + spec.study_id);
  for (std::size_t k = 0; k < raw_state.size(); ++k) bin_raw_value(spec.learned_feature(k), raw_state[k]);
  for (const Sample& x : few_shot)
    if (spec.cluster_of(x.action_id) != action.cluster_id)
      throw Error(ErrorKind::precondition, "few-shot sample action " + std::to_string(x.action_id) +
                                               " is not in the cluster of action '" + action.name + "'");
  const std::string where = template_file_name(tpl.study_id, tpl.kind, tpl.length, tpl.style, tpl.variant);
  if (!few_shot.empty() && tpl.body.find("{{examples}}") == std::string::npos)
    throw Error(ErrorKind::invariant, where + ": few-shot samples given but template has no {{examples}}");

  std::string action_text;
  if (tpl.length == PromptLength::extensive && action.full_text) action_text = *action.full_text;
  const std::map<std::string, std::string> values{
      {"state", render_state_lines(raw_state, spec)},
      {"action", action.text},
      {"action_text", action_text},
      {"examples", render_examples(tpl, few_shot, spec)},
  };
  return substitute(tpl.body, values, where);
}

std::string render_prompt(const PromptTemplate& tpl, const State& state, const ActionDef& action,
                          std::span<const Sample> few_shot, const StudySpec& spec) {
  const auto raws = representative_raws(state, spec);
  return render_prompt_raw(tpl, raws, action, few_shot, spec);
}

}  // namespace bootrl

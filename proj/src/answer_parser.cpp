#include "bootrl/answer_parser.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <string>

namespace bootrl {

std::string_view to_string(AnswerError e) {
  switch (e) {
    case AnswerError::no_answer: return "no_answer";
    case AnswerError::wrong_length: return "wrong_length";
    case AnswerError::out_of_range: return "out_of_range";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Strips markdown emphasis and trailing sentence punctuation around a short answer.
std::string bare(std::string_view s) {
  std::string t = trim(s);
  auto strip = [](char c) { return c == '*' || c == '_' || c == '`' || c == '.' || c == '!' || c == '"'; };
  while (!t.empty() && strip(t.back())) t.pop_back();
  std::size_t b = 0;
  while (b < t.size() && strip(t[b])) ++b;
  return trim(std::string_view(t).substr(b));
}

std::string last_line(std::string_view text) {
  std::string t = trim(text);
  const auto nl = t.find_last_of('\n');
  return nl == std::string::npos ? t : t.substr(nl + 1);
}

// Every number captured by `re` in order; a candidate carries its text.
std::vector<std::string> captures(const std::string& text, const std::regex& re) {
  std::vector<std::string> out;
  for (std::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it)
    out.push_back((*it)[1].str());
  return out;
}

bool is_integer(const std::string& s) {
  static const std::regex re(R"(-?\d+)");
  return std::regex_match(s, re);
}

RewardAnswer effort_answer(const std::string& token) {
  if (!is_integer(token) || token.size() > 4)
    throw AnswerParseError(AnswerError::out_of_range, "effort '" + token + "' is not an integer in 0..10");
  const int effort = std::stoi(token);
  if (effort < 0 || effort > 10)
    throw AnswerParseError(AnswerError::out_of_range, "effort " + token + " outside 0..10");
  return {map_effort_to_reward(effort), effort};
}

RewardAnswer parse_effort(std::string_view text) {
  const std::string t(text);
  static const std::regex labelled(R"(effort\s*\**\s*[:=]\s*\**\s*(-?\d+(?:\.\d+)?))", std::regex::icase);
  static const std::regex boxed(R"(\\boxed\{\s*(-?\d+(?:\.\d+)?)\s*\})");
  for (const auto* re : {&labelled, &boxed}) {
    const auto found = captures(t, *re);
    if (found.empty()) continue;
    for (auto it = found.rbegin(); it != found.rend(); ++it) {
      try {
        return effort_answer(*it);
      } catch (const AnswerParseError&) {
      }
    }
    effort_answer(found.back());  // throws the error of the last candidate
  }
  static const std::regex number(R"(-?\d+(?:\.\d+)?)");
  for (const std::string& candidate : {bare(t), bare(last_line(t))})
    if (std::regex_match(candidate, number)) return effort_answer(candidate);
  throw AnswerParseError(AnswerError::no_answer, "no effort answer found");
}

RewardAnswer completion_answer(const std::string& word) {
  const bool yes = lower(word) == "yes";
  return {yes ? 1.0 : 0.0, yes ? 1 : 0};
}

RewardAnswer parse_completion(std::string_view text) {
  const std::string t(text);
  static const std::regex labelled(R"((?:completed|completion|complete|answer)\s*\**\s*[:=]\s*\**\s*(yes|no)\b)",
                                   std::regex::icase);
  const auto found = captures(t, labelled);
  if (!found.empty()) return completion_answer(found.back());
  for (const std::string& candidate : {bare(t), bare(last_line(t))}) {
    const std::string w = lower(candidate);
    if (w == "yes" || w == "no") return completion_answer(w);
  }
  throw AnswerParseError(AnswerError::no_answer, "no yes/no completion answer found");
}

}  // namespace

RewardAnswer parse_reward(std::string_view text, const StudySpec& spec) {
  if (spec.reward.kind == RewardKind::completion_with_diversity_cost) return parse_completion(text);
  return parse_effort(text);
}

NextStateAnswer parse_next_state(std::string_view text, const StudySpec& spec) {
  const std::string t(text);
  static const std::regex list(R"(\[\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*\])");
  static const std::regex item(R"(-?\d+)");
  const std::size_t want = spec.num_learned_features();

  std::vector<std::vector<std::string>> lists;
  for (std::sregex_iterator it(t.begin(), t.end(), list), end; it != end; ++it) {
    const std::string inner = (*it)[1].str();
    std::vector<std::string> values;
    for (std::sregex_iterator v(inner.begin(), inner.end(), item); v != end; ++v) values.push_back(v->str());
    lists.push_back(std::move(values));
  }
  if (lists.empty()) throw AnswerParseError(AnswerError::no_answer, "no bracketed state list found");

  auto check = [&](const std::vector<std::string>& values) -> NextStateAnswer {
    if (values.size() != want)
      throw AnswerParseError(AnswerError::wrong_length, "state list has " + std::to_string(values.size()) +
                                                           " values, expected " + std::to_string(want));
    NextStateAnswer out;
    for (std::size_t k = 0; k < want; ++k) {
      const FeatureDef& f = spec.learned_feature(k);
      if (values[k].size() > 6)
        throw AnswerParseError(AnswerError::out_of_range, "value " + values[k] + " for " + f.name);
      const int raw = std::stoi(values[k]);
      const auto [lo, hi] = f.raw_scale.value();
      if (raw < lo || raw > hi)
        throw AnswerParseError(AnswerError::out_of_range, "value " + values[k] + " for " + f.name +
                                                              " outside " + std::to_string(lo) + ".." +
                                                              std::to_string(hi));
      out.raw.push_back(raw);
      out.state.values.push_back(bin_raw_value(f, raw));
    }
    return out;
  };
  for (auto it = lists.rbegin(); it != lists.rend(); ++it) {
    try {
      return check(*it);
    } catch (const AnswerParseError&) {
    }
  }
  return check(lists.back());
}

}  // namespace bootrl

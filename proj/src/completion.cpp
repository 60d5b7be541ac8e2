#include "bootrl/completion.hpp"

#include <json.hpp>

#include "bootrl/error.hpp"
#include "bootrl/rng.hpp"

namespace bootrl {

std::string build_chat_request_body(const CompletionRequest& request) {
  nlohmann::json body{
      {"model", request.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"top_p", request.top_p},
      {"max_tokens", request.max_tokens},
      {"seed", request.seed},
  };
  return body.dump();
}

std::string extract_completion_text(std::string_view response_body) {
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(response_body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("completion response is not JSON: ") + e.what());
  }
  const nlohmann::json* content = nullptr;
  if (body.contains("choices") && body["choices"].is_array() && !body["choices"].empty()) {
    const auto& choice = body["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content"))
      content = &choice["message"]["content"];
    else if (choice.contains("text"))
      content = &choice["text"];
  }
  if (!content || !content->is_string() || content->get_ref<const std::string&>().empty())
    throw Error(ErrorKind::empty_completion, "completion response carries no text");
  return content->get<std::string>();
}

MockEndpoint::MockEndpoint(const StudySpec& spec, GroundTruth truth)
    : spec_(spec), truth_(std::move(truth)) {
  truth_.validate(spec_);
}

std::string MockEndpoint::complete(const CompletionRequest& request) {
  if (!request.context)
    throw Error(ErrorKind::precondition, "mock endpoint needs a query context");
  const QueryContext& q = *request.context;
  const std::size_t s = encode_state(q.state, spec_);
  const auto c = static_cast<std::size_t>(spec_.cluster_of(q.action_id));
  Rng rng(derive_seed({request.seed, 0x6d6f636bULL}));

  if (q.kind == QuestionKind::reward) {
    return format_reward_answer(spec_, draw_reported_reward(spec_, truth_.learned.reward(s, c), rng));
  }
  const auto row = truth_.learned.row(s, c);
  const std::size_t next = rng.categorical(row);
  const auto raws = representative_raws(decode_state(next, spec_), spec_);
  return format_next_state_answer(raws);
}

}  // namespace bootrl

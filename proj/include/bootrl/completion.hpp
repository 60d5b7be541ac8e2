#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>

#include "bootrl/prompts.hpp"
#include "bootrl/simulator.hpp"
#include "bootrl/study.hpp"

namespace bootrl {

// What a request asks about. Real endpoints ignore it; the mock endpoint
// answers from it.
struct QueryContext {
  QuestionKind kind = QuestionKind::reward;
  State state;
  int action_id = 0;
};

struct CompletionRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.6;
  double top_p = 0.9;
  int max_tokens = 4096;
  std::uint64_t seed = 0;
  std::optional<QueryContext> context;
};

struct EndpointStats {
  std::uint64_t requests = 0;
  std::uint64_t retries = 0;
  std::uint64_t rate_limited = 0;
  std::uint64_t failures = 0;
};

class CompletionEndpoint {
 public:
  virtual ~CompletionEndpoint() = default;
  // Returns the completion text. Throws Error(transport | http_status |
  // empty_completion) once retries are exhausted.
  virtual std::string complete(const CompletionRequest& request) = 0;
  // Source tag written on samples produced through this endpoint.
  virtual SampleSource source() const = 0;
  virtual EndpointStats stats() const { return {}; }
};

// OpenAI-style chat completion body for one user message.
std::string build_chat_request_body(const CompletionRequest& request);
// choices[0].message.content; throws Error(empty_completion) when absent or
// empty, Error(parse) when the body is not JSON.
std::string extract_completion_text(std::string_view response_body);

struct HttpEndpointConfig {
  // Base URL such as "http://127.0.0.1:8000"; requests go to base + path.
  std::string url;
  std::string path = "/v1/chat/completions";
  std::string api_key;  // sent as a bearer token when non-empty
  int max_retries = 4;
  int max_parallel = 8;
  std::chrono::milliseconds backoff{500};
  std::chrono::seconds timeout{600};
};

class HttpChatEndpoint final : public CompletionEndpoint {
 public:
  explicit HttpChatEndpoint(HttpEndpointConfig config);

  std::string complete(const CompletionRequest& request) override;
  SampleSource source() const override { return SampleSource::llm; }
  EndpointStats stats() const override;

 private:
  HttpEndpointConfig config_;
  std::counting_semaphore<1024> slots_;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> retries_{0};
  std::atomic<std::uint64_t> rate_limited_{0};
  std::atomic<std::uint64_t> failures_{0};
};

// Answers from a ground truth: effort questions with one of the two efforts
// bracketing the true mean (so the expectation equals the mean), completion
// questions with a Bernoulli(mean) yes/no, next-state questions with a state
// drawn from the true transition row, shown through representative raw
// values. Deterministic in the request seed. Requires a context.
class MockEndpoint final : public CompletionEndpoint {
 public:
  MockEndpoint(const StudySpec& spec, GroundTruth truth);

  std::string complete(const CompletionRequest& request) override;
  SampleSource source() const override { return SampleSource::mock; }

 private:
  const StudySpec& spec_;
  GroundTruth truth_;
};

}  // namespace bootrl

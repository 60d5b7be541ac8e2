#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <thread>

#include "bootrl/completion.hpp"
#include "bootrl/error.hpp"

namespace bootrl {

HttpChatEndpoint::HttpChatEndpoint(HttpEndpointConfig config)
    : config_(std::move(config)), slots_(std::clamp(config_.max_parallel, 1, 1024)) {
  if (config_.url.empty()) throw Error(ErrorKind::precondition, "endpoint url is empty");
  if (config_.max_retries < 0) throw Error(ErrorKind::precondition, "max_retries must be >= 0");
}

EndpointStats HttpChatEndpoint::stats() const {
  return {requests_.load(), retries_.load(), rate_limited_.load(), failures_.load()};
}

std::string HttpChatEndpoint::complete(const CompletionRequest& request) {
  struct Slot {
    std::counting_semaphore<1024>& s;
    explicit Slot(std::counting_semaphore<1024>& sem) : s(sem) { s.acquire(); }
    ~Slot() { s.release(); }
  } slot(slots_);

  const std::string body = build_chat_request_body(request);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  for (int attempt = 0;; ++attempt) {
    ++requests_;
    httplib::Client client(config_.url);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(std::chrono::seconds(30));
    auto res = client.Post(config_.path, headers, body, "application/json");

    std::string failure;
    ErrorKind kind = ErrorKind::transport;
    if (!res) {
      failure = "request to " + config_.url + config_.path + " failed: " + httplib::to_string(res.error());
    } else if (res->status == 429 || res->status >= 500) {
      if (res->status == 429) ++rate_limited_;
      kind = ErrorKind::http_status;
      failure = "endpoint answered HTTP " + std::to_string(res->status);
    } else if (res->status < 200 || res->status >= 300) {
      ++failures_;
      throw Error(ErrorKind::http_status, "endpoint answered HTTP " + std::to_string(res->status) +
                                              ": " + res->body.substr(0, 200));
    } else {
      try {
        return extract_completion_text(res->body);
      } catch (const Error&) {
        ++failures_;
        throw;
      }
    }

    if (attempt >= config_.max_retries) {
      ++failures_;
      throw Error(kind, failure + " (after " + std::to_string(attempt + 1) + " attempts)");
    }
    ++retries_;
    std::this_thread::sleep_for(config_.backoff * (1LL << std::min(attempt, 16)));
  }
}

}  // namespace bootrl

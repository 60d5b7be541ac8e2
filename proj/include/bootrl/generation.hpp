#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bootrl/completion.hpp"
#include "bootrl/sample_store.hpp"
#include "bootrl/study.hpp"

namespace bootrl {

struct GenerationPlan {
  std::string model = "mock";
  std::vector<int> variants{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  // Samples per (variant, action cluster).
  std::size_t n_per_action = 100;
  PromptLength length = PromptLength::base;
  PromptStyle style = PromptStyle::plain;
  int few_shot_k = 0;
  double temperature = 0.6;
  double top_p = 0.9;
  int max_tokens = 4096;
  std::uint64_t seed = 0;
  // Extra samples of a question after a parse failure.
  int max_retries = 3;
  // Concurrent slots in flight.
  int max_parallel = 8;
  // Stop after this many new slots (simulates an interrupted campaign).
  std::optional<std::size_t> stop_after;

  // Throws Error(precondition) for an unusable plan. Few-shot prompting needs
  // real samples to draw examples from.
  void validate(const StudySpec& spec, bool have_real_samples) const;
  // Non-fatal remarks, e.g. a temperature other than 0.1, 0.6 or 0.9.
  std::vector<std::string> warnings() const;
};

// One completion for a prompt with the plan's sampling parameters.
std::string chat_complete(CompletionEndpoint& endpoint, const GenerationPlan& plan, std::string prompt,
                          std::uint64_t seed, std::optional<QueryContext> context = std::nullopt);

struct CampaignStats {
  std::size_t planned = 0;           // slots in the plan
  std::size_t already_present = 0;   // skipped on resume
  std::size_t generated = 0;         // new samples appended
  std::size_t failed = 0;            // slots that never produced a parseable pair
  std::size_t parse_failures = 0;    // individual unparseable completions
  std::size_t endpoint_errors = 0;   // completions that failed after endpoint retries
  bool interrupted = false;
  std::vector<std::string> warnings;
};

// Slot i of (variant, cluster): state index i mod S, then the cluster's
// actions in round robin. Both questions for a slot share state and action.
// Samples are appended in slot order chunk by chunk; slots already in the
// store under the same provenance are skipped. The store is compacted at
// the end, so an interrupted and resumed campaign leaves the same bytes as
// an uninterrupted one.
CampaignStats run_campaign(const StudySpec& spec, const GenerationPlan& plan,
                           CompletionEndpoint& endpoint, std::span<const Sample> real_samples,
                           SampleStore& store);

}  // namespace bootrl

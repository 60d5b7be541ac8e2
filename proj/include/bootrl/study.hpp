#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bootrl {

enum class FeatureRole { learned, deterministic };

struct FeatureDef {
  std::string name;
  FeatureRole role = FeatureRole::learned;
  int cardinality = 0;
  std::vector<std::string> value_labels;
  // Wording used when the feature is shown in a prompt, e.g.
  // "Confidence in preparing for quitting smoking now".
  std::string question;
  // Prompt-scale interval [lo, hi] and cut points. bin_edges[i] is the
  // largest raw value that still falls in bin i; there are cardinality-1.
  std::optional<std::pair<int, int>> raw_scale;
  std::vector<int> bin_edges;
};

struct ActionDef {
  int id = 0;
  std::string name;
  int cluster_id = 0;
  // Short description used in every prompt.
  std::string text;
  // Long description shown only in extensive prompts.
  std::optional<std::string> full_text;
  // Competency hook: per deterministic feature, the activity's contribution.
  std::vector<double> contribution;
  // Diversity hook: index of the coping strategy counter this action feeds.
  std::optional<int> strategy;
};

enum class RewardKind { scaled_effort, completion_with_diversity_cost, competency_increase };

struct RewardSpec {
  RewardKind kind = RewardKind::scaled_effort;
  double lo = -1.0;
  double hi = 1.0;
  std::optional<double> diversity_weight;

  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double r) const { return r >= lo && r <= hi; }
};

enum class PromptLength { base, extensive };
enum class PromptStyle { plain, cot };

enum class Criterion { mean_reward, competency_fraction, diversity_fraction };

// Update rule for the features that are not learned from samples.
enum class DeterministicHook { none, competency, diversity };

struct StudySpec {
  std::string study_id;
  std::string title;
  std::vector<FeatureDef> features;
  std::vector<ActionDef> actions;
  RewardSpec reward;
  Criterion criterion = Criterion::mean_reward;
  DeterministicHook hook = DeterministicHook::none;
  std::filesystem::path prompt_dir;
  // Prompt lengths with template assets; some studies only have extensive.
  std::vector<PromptLength> prompt_lengths;
  int default_horizon = 20;

  std::vector<std::size_t> learned_feature_indices() const;
  std::vector<std::size_t> deterministic_feature_indices() const;
  const FeatureDef& learned_feature(std::size_t k) const;
  std::size_t num_learned_features() const;
  std::size_t num_learned_states() const;
  std::size_t num_deterministic_features() const;
  std::size_t num_clusters() const;
  const ActionDef& action(int id) const;
  int cluster_of(int action_id) const;
  std::vector<int> actions_in_cluster(int cluster) const;
};

// Learned feature values only; deterministic features live in the simulator.
struct State {
  std::vector<int> values;
  auto operator<=>(const State&) const = default;
};

enum class SampleSource { real, llm, human, mock };

struct Sample {
  State state;
  int action_id = 0;
  double reward = 0.0;
  State next_state;
  SampleSource source = SampleSource::real;
  std::optional<std::string> model_id;
  std::optional<int> prompt_variant;
  std::optional<PromptLength> prompt_length;
  std::optional<PromptStyle> prompt_style;
  std::optional<int> few_shot_k;
  std::optional<double> temperature;
  std::optional<std::uint64_t> seed;
  // Campaign slot index within (variant, action cluster); the resume key.
  std::optional<int> slot;

  bool operator==(const Sample&) const = default;
};

std::string_view to_string(FeatureRole v);
std::string_view to_string(RewardKind v);
std::string_view to_string(Criterion v);
std::string_view to_string(DeterministicHook v);
std::string_view to_string(SampleSource v);
std::string_view to_string(PromptLength v);
std::string_view to_string(PromptStyle v);

SampleSource parse_sample_source(std::string_view s);
PromptLength parse_prompt_length(std::string_view s);
PromptStyle parse_prompt_style(std::string_view s);
DeterministicHook parse_hook(std::string_view s);

StudySpec load_study_spec(const std::filesystem::path& path);
StudySpec parse_study_spec(std::string_view text, const std::string& source_name,
                           const std::filesystem::path& base_dir);
// Throws Error(invariant) naming the first failing rule.
void validate_study_spec(const StudySpec& spec);

// Directory holding the bundled studies/ and prompts/ assets. Honors the
// BOOTRL_ASSET_DIR environment variable.
std::filesystem::path asset_dir();
std::filesystem::path bundled_study_path(int study_number);

// Mixed-radix over learned features, first feature most significant.
std::size_t encode_state(const State& state, const StudySpec& spec);
State decode_state(std::size_t index, const StudySpec& spec);

// r = effort/5 - 1 for effort in 0..10.
double map_effort_to_reward(int effort);
// Nearest effort on the 0..10 scale for a reward in [-1, 1].
int reward_to_effort(double reward);

std::vector<int> equal_width_edges(int lo, int hi, int cardinality);
int bin_raw_value(const FeatureDef& feature, int raw);
int representative_raw(const FeatureDef& feature, int index);

void validate_state(const State& state, const StudySpec& spec);
void validate_sample(const Sample& sample, const StudySpec& spec);

}  // namespace bootrl

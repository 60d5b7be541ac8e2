#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bootrl/completion.hpp"
#include "bootrl/dynamics.hpp"
#include "bootrl/generation.hpp"
#include "bootrl/metrics.hpp"
#include "bootrl/simulator.hpp"
#include "bootrl/solver.hpp"
#include "bootrl/study.hpp"

namespace bootrl {

struct DataConfig {
  // Delimited files ingested on first use when the run has no store yet.
  std::optional<std::filesystem::path> real;
  std::optional<std::filesystem::path> human;
  // "real": the truth is estimated from the real samples. "synthetic": a
  // generated truth, and the real store is sampled from it when absent.
  std::string truth = "real";
  std::optional<std::uint64_t> synthetic_seed;
  std::size_t synthetic_samples = 500;  // per action cluster
  SyntheticTruthOptions synthetic;
};

struct EndpointConfig {
  std::string kind = "mock";  // mock | http
  std::string url;
  std::string path = "/v1/chat/completions";
  int backoff_ms = 500;
  int timeout_s = 600;
};

struct SimulatorConfig {
  std::size_t users = 200;
  std::size_t horizon = 0;  // 0: the study's default horizon
  std::optional<std::uint64_t> seed;
};

struct SweepSettings {
  std::vector<std::size_t> n_grid{10, 20, 50, 100, 200, 300, 400, 500};
  std::size_t oracle_draws = 10;
  double smoothing = 0.0;
  bool include_fallback = true;
  std::optional<std::uint64_t> seed;
};

struct RunConfig {
  std::filesystem::path config_path;
  std::filesystem::path study_path;
  std::filesystem::path run_dir;
  std::uint64_t seed = 0;
  DataConfig data;
  EndpointConfig endpoint;
  GenerationPlan plan;
  bool plan_seed_set = false;
  SolverConfig solver;
  SimulatorConfig simulator;
  SweepSettings sweep;

  std::uint64_t simulator_seed() const;
  std::uint64_t sweep_seed() const;
  std::uint64_t synthetic_seed() const;
  // Snapshot without machine-specific paths; the run id hashes it.
  nlohmann::json snapshot() const;
  std::string run_id() const;
};

// Keyed config file with tables [run], [data], [plan], [solver], [simulator],
// [sweep]. Relative paths resolve against the file's directory. Unknown keys
// are errors.
RunConfig parse_run_config(std::string_view text, const std::string& source_name,
                           const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Command-line overrides of config keys.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> study;  // bundled number or path
  std::optional<std::vector<int>> variants;
  std::optional<std::size_t> n_per_action;
  std::optional<double> temperature;
  std::optional<int> few_shot_k;
  std::optional<PromptStyle> style;
  std::optional<PromptLength> length;
  std::optional<std::string> endpoint;  // mock | http
  std::optional<std::string> model;
  std::optional<std::filesystem::path> dir;
};
// --seed replaces every seed in the config.
void apply_overrides(RunConfig& config, const Overrides& overrides);

// Serialized artifacts. All JSON is written with sorted keys.
nlohmann::json to_json(const DynamicsModel& model);
DynamicsModel dynamics_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Policy& policy);
Policy policy_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CriterionSeries& series);
CriterionSeries series_from_json(const nlohmann::json& j);
nlohmann::json to_json(const L1Sweep& sweep);
L1Sweep sweep_from_json(const nlohmann::json& j);

std::string sha256_hex(const std::filesystem::path& file);

// Label shared by generated samples with equal model, prompt length, style,
// few-shot count and temperature, e.g. "mock|base|plain|k0|t0.6".
std::string provenance_label(const Sample& sample);

// One working directory per run:
//   samples/   real.jsonl human.jsonl generated.jsonl
//   dynamics/  truth.json human.json generated/<entity>/vNN.json
//   policies/  optimal.json worst.json random.json no_learned_dynamics.json
//              human.json generated/<entity>/vNN.json
//   series/    one CriterionSeries per policy (generated: across variants)
//   sweep/     l1_sweep.json
//   reports/   policy_performance.tsv l1_reward.tsv l1_transition.tsv
//   manifests/ <command>.json
class Run {
 public:
  explicit Run(RunConfig config);

  const RunConfig& config() const { return config_; }
  const StudySpec& spec() const { return spec_; }
  std::filesystem::path path(const std::string& relative) const { return config_.run_dir / relative; }

  // Stored samples; an absent store is empty. Real samples are materialised
  // from [data] on first use.
  std::vector<Sample> real_samples();
  std::vector<Sample> human_samples();
  std::vector<Sample> generated_samples() const;
  GroundTruth truth();

  void ingest(const std::filesystem::path& input, SampleSource source);
  void export_store(SampleSource source, const std::filesystem::path& output);
  // With no endpoint given, one is built from [plan] endpoint.
  CampaignStats generate(CompletionEndpoint* endpoint = nullptr);
  void estimate();
  void solve();
  void simulate();
  void sweep();
  void report();
  void pipeline(CompletionEndpoint* endpoint = nullptr);

 private:
  class Manifest;
  std::vector<Sample> load_store(const std::string& name) const;

  RunConfig config_;
  StudySpec spec_;
  Manifest* manifest_ = nullptr;
};

}  // namespace bootrl

#include "bootrl/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "bootrl/error.hpp"
#include "bootrl/keyed_config.hpp"

namespace bootrl {

namespace {

using nlohmann::json;

[[noreturn]] void invariant(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::invariant, where + ": " + what);
}

template <typename T>
T required(const json& table, const char* key, const std::string& where) {
  if (!table.contains(key)) invariant(where, std::string("missing key '") + key + "'");
  try {
    return table.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    invariant(where, std::string("key '") + key + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_key(const json& table, const char* key, const std::string& where) {
  if (!table.contains(key)) return std::nullopt;
  return required<T>(table, key, where);
}

RewardKind parse_reward_kind(const std::string& s, const std::string& where) {
  if (s == "scaled_effort") return RewardKind::scaled_effort;
  if (s == "completion_with_diversity_cost") return RewardKind::completion_with_diversity_cost;
  if (s == "competency_increase") return RewardKind::competency_increase;
  invariant(where, "unknown reward kind '" + s + "'");
}

Criterion parse_criterion(const std::string& s, const std::string& where) {
  if (s == "mean_reward") return Criterion::mean_reward;
  if (s == "competency_fraction") return Criterion::competency_fraction;
  if (s == "diversity_fraction") return Criterion::diversity_fraction;
  invariant(where, "unknown criterion '" + s + "'");
}

FeatureRole parse_role(const std::string& s, const std::string& where) {
  if (s == "learned") return FeatureRole::learned;
  if (s == "deterministic") return FeatureRole::deterministic;
  invariant(where, "unknown feature role '" + s + "'");
}

DeterministicHook hook_for(RewardKind kind) {
  switch (kind) {
    case RewardKind::scaled_effort: return DeterministicHook::none;
    case RewardKind::competency_increase: return DeterministicHook::competency;
    case RewardKind::completion_with_diversity_cost: return DeterministicHook::diversity;
  }
  return DeterministicHook::none;
}

Criterion criterion_for(RewardKind kind) {
  switch (kind) {
    case RewardKind::scaled_effort: return Criterion::mean_reward;
    case RewardKind::competency_increase: return Criterion::competency_fraction;
    case RewardKind::completion_with_diversity_cost: return Criterion::diversity_fraction;
  }
  return Criterion::mean_reward;
}

std::string feature_where(const FeatureDef& f, std::size_t i) {
  return "feature #" + std::to_string(i + 1) + " '" + f.name + "'";
}

}  // namespace

std::string_view to_string(FeatureRole v) {
  return v == FeatureRole::learned ? "learned" : "deterministic";
}

std::string_view to_string(RewardKind v) {
  switch (v) {
    case RewardKind::scaled_effort: return "scaled_effort";
    case RewardKind::completion_with_diversity_cost: return "completion_with_diversity_cost";
    case RewardKind::competency_increase: return "competency_increase";
  }
  return "?";
}

std::string_view to_string(Criterion v) {
  switch (v) {
    case Criterion::mean_reward: return "mean_reward";
    case Criterion::competency_fraction: return "competency_fraction";
    case Criterion::diversity_fraction: return "diversity_fraction";
  }
  return "?";
}

std::string_view to_string(DeterministicHook v) {
  switch (v) {
    case DeterministicHook::none: return "none";
    case DeterministicHook::competency: return "competency";
    case DeterministicHook::diversity: return "diversity";
  }
  return "?";
}

std::string_view to_string(SampleSource v) {
  switch (v) {
    case SampleSource::real: return "real";
    case SampleSource::llm: return "llm";
    case SampleSource::human: return "human";
    case SampleSource::mock: return "mock";
  }
  return "?";
}

std::string_view to_string(PromptLength v) { return v == PromptLength::base ? "base" : "extensive"; }
std::string_view to_string(PromptStyle v) { return v == PromptStyle::plain ? "plain" : "cot"; }

SampleSource parse_sample_source(std::string_view s) {
  if (s == "real") return SampleSource::real;
  if (s == "llm") return SampleSource::llm;
  if (s == "human") return SampleSource::human;
  if (s == "mock") return SampleSource::mock;
  throw Error(ErrorKind::parse, "unknown sample source '" + std::string(s) + "'");
}

PromptLength parse_prompt_length(std::string_view s) {
  if (s == "base") return PromptLength::base;
  if (s == "extensive" || s == "ext") return PromptLength::extensive;
  throw Error(ErrorKind::parse, "unknown prompt length '" + std::string(s) + "'");
}

PromptStyle parse_prompt_style(std::string_view s) {
  if (s == "plain") return PromptStyle::plain;
  if (s == "cot") return PromptStyle::cot;
  throw Error(ErrorKind::parse, "unknown prompt style '" + std::string(s) + "'");
}

DeterministicHook parse_hook(std::string_view s) {
  if (s == "none") return DeterministicHook::none;
  if (s == "competency") return DeterministicHook::competency;
  if (s == "diversity") return DeterministicHook::diversity;
  throw Error(ErrorKind::invariant, "unknown hook id '" + std::string(s) + "'");
}

std::vector<std::size_t> StudySpec::learned_feature_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].role == FeatureRole::learned) out.push_back(i);
  return out;
}

std::vector<std::size_t> StudySpec::deterministic_feature_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].role == FeatureRole::deterministic) out.push_back(i);
  return out;
}

const FeatureDef& StudySpec::learned_feature(std::size_t k) const {
  std::size_t seen = 0;
  for (const auto& f : features) {
    if (f.role != FeatureRole::learned) continue;
    if (seen++ == k) return f;
  }
  throw Error(ErrorKind::out_of_range, "learned feature index " + std::to_string(k));
}

std::size_t StudySpec::num_learned_features() const { return learned_feature_indices().size(); }

std::size_t StudySpec::num_learned_states() const {
  std::size_t n = 1;
  for (const auto& f : features)
    if (f.role == FeatureRole::learned) n *= static_cast<std::size_t>(f.cardinality);
  return n;
}

std::size_t StudySpec::num_deterministic_features() const {
  return deterministic_feature_indices().size();
}

std::size_t StudySpec::num_clusters() const {
  int c = -1;
  for (const auto& a : actions) c = std::max(c, a.cluster_id);
  return static_cast<std::size_t>(c + 1);
}

const ActionDef& StudySpec::action(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= actions.size())
    throw Error(ErrorKind::out_of_range, "action id " + std::to_string(id) + " not in study " + study_id);
  return actions[static_cast<std::size_t>(id)];
}

int StudySpec::cluster_of(int action_id) const { return action(action_id).cluster_id; }

std::vector<int> StudySpec::actions_in_cluster(int cluster) const {
  std::vector<int> out;
  for (const auto& a : actions)
    if (a.cluster_id == cluster) out.push_back(a.id);
  return out;
}

std::vector<int> equal_width_edges(int lo, int hi, int cardinality) {
  const long n = static_cast<long>(hi) - lo + 1;
  std::vector<int> edges;
  for (int i = 0; i + 1 < cardinality; ++i) {
    const long upper = ((i + 1) * n + cardinality - 1) / cardinality;  // ceil
    edges.push_back(static_cast<int>(lo + upper - 1));
  }
  return edges;
}

int bin_raw_value(const FeatureDef& feature, int raw) {
  if (!feature.raw_scale)
    throw Error(ErrorKind::precondition, "feature '" + feature.name + "' has no raw scale");
  const auto [lo, hi] = *feature.raw_scale;
  if (raw < lo || raw > hi)
    throw Error(ErrorKind::out_of_range, "raw value " + std::to_string(raw) + " outside " +
                                             std::to_string(lo) + ".." + std::to_string(hi) +
                                             " for feature '" + feature.name + "'");
  int bin = 0;
  while (bin < static_cast<int>(feature.bin_edges.size()) &&
         raw > feature.bin_edges[static_cast<std::size_t>(bin)])
    ++bin;
  return bin;
}

int representative_raw(const FeatureDef& feature, int index) {
  if (!feature.raw_scale)
    throw Error(ErrorKind::precondition, "feature '" + feature.name + "' has no raw scale");
  if (index < 0 || index >= feature.cardinality)
    throw Error(ErrorKind::out_of_range, "bin " + std::to_string(index) + " of feature '" +
                                             feature.name + "'");
  const auto [lo, hi] = *feature.raw_scale;
  const auto i = static_cast<std::size_t>(index);
  const int first = index == 0 ? lo : feature.bin_edges[i - 1] + 1;
  const int last = index + 1 == feature.cardinality ? hi : feature.bin_edges[i];
  // Midpoint rounded half-up; first+last >= 0 is not assumed.
  return static_cast<int>(std::floor((first + last) / 2.0 + 0.5));
}

std::size_t encode_state(const State& state, const StudySpec& spec) {
  validate_state(state, spec);
  std::size_t index = 0;
  std::size_t k = 0;
  for (const auto& f : spec.features) {
    if (f.role != FeatureRole::learned) continue;
    index = index * static_cast<std::size_t>(f.cardinality) +
            static_cast<std::size_t>(state.values[k++]);
  }
  return index;
}

State decode_state(std::size_t index, const StudySpec& spec) {
  const std::size_t n = spec.num_learned_states();
  if (index >= n)
    throw Error(ErrorKind::out_of_range,
                "state index " + std::to_string(index) + " >= " + std::to_string(n));
  const auto learned = spec.learned_feature_indices();
  State s;
  s.values.resize(learned.size());
  for (std::size_t k = learned.size(); k-- > 0;) {
    const auto card = static_cast<std::size_t>(spec.features[learned[k]].cardinality);
    s.values[k] = static_cast<int>(index % card);
    index /= card;
  }
  return s;
}

double map_effort_to_reward(int effort) {
  if (effort < 0 || effort > 10)
    throw Error(ErrorKind::out_of_range, "effort " + std::to_string(effort) + " outside 0..10");
  return effort / 5.0 - 1.0;
}

int reward_to_effort(double reward) {
  const double e = std::round((reward + 1.0) * 5.0);
  return static_cast<int>(std::clamp(e, 0.0, 10.0));
}

void validate_state(const State& state, const StudySpec& spec) {
  const auto learned = spec.learned_feature_indices();
  if (state.values.size() != learned.size())
    throw Error(ErrorKind::out_of_range, "state has " + std::to_string(state.values.size()) +
                                             " values, study " + spec.study_id + " has " +
                                             std::to_string(learned.size()) + " learned features");
  for (std::size_t k = 0; k < learned.size(); ++k) {
    const auto& f = spec.features[learned[k]];
    if (state.values[k] < 0 || state.values[k] >= f.cardinality)
      throw Error(ErrorKind::out_of_range, "value " + std::to_string(state.values[k]) +
                                               " out of range for feature '" + f.name + "'");
  }
}

void validate_sample(const Sample& sample, const StudySpec& spec) {
  validate_state(sample.state, spec);
  validate_state(sample.next_state, spec);
  spec.action(sample.action_id);
  if (!spec.reward.contains(sample.reward) || !std::isfinite(sample.reward)) {
    std::ostringstream os;
    os << "reward " << sample.reward << " outside [" << spec.reward.lo << ", " << spec.reward.hi << "]";
    throw Error(ErrorKind::out_of_range, os.str());
  }
  if (sample.prompt_variant && (*sample.prompt_variant < 1 || *sample.prompt_variant > 10))
    throw Error(ErrorKind::out_of_range, "prompt variant outside 1..10");
}

void validate_study_spec(const StudySpec& spec) {
  const std::string where = "study '" + spec.study_id + "'";
  if (spec.study_id.empty()) invariant(where, "study id is empty");

  for (std::size_t i = 0; i < spec.features.size(); ++i) {
    const auto& f = spec.features[i];
    const std::string fw = where + " " + feature_where(f, i);
    if (f.cardinality < 2) invariant(fw, "cardinality must be >= 2");
    if (f.value_labels.size() != static_cast<std::size_t>(f.cardinality))
      invariant(fw, "value_labels must have exactly cardinality entries");
    if (f.role == FeatureRole::learned && !f.raw_scale)
      invariant(fw, "learned features need a raw_scale");
    if (f.raw_scale) {
      const auto [lo, hi] = *f.raw_scale;
      if (hi - lo + 1 < f.cardinality) invariant(fw, "raw_scale too narrow for cardinality");
      if (f.bin_edges.size() != static_cast<std::size_t>(f.cardinality - 1))
        invariant(fw, "bin_edges must have cardinality-1 entries");
      int prev = lo - 1;
      for (int e : f.bin_edges) {
        if (e <= prev) invariant(fw, "bin_edges must be strictly ascending with nonempty bins");
        prev = e;
      }
      if (!f.bin_edges.empty() && f.bin_edges.back() >= hi)
        invariant(fw, "last bin is empty");
    } else if (!f.bin_edges.empty()) {
      invariant(fw, "bin_edges without raw_scale");
    }
  }
  if (spec.num_learned_features() == 0) invariant(where, "at least one learned feature required");
  if (spec.actions.size() < 2) invariant(where, "at least 2 actions required");

  std::set<int> clusters;
  for (std::size_t i = 0; i < spec.actions.size(); ++i) {
    const auto& a = spec.actions[i];
    if (a.id != static_cast<int>(i))
      invariant(where, "action ids must be 0..N-1 in order (action '" + a.name + "')");
    if (a.cluster_id < 0) invariant(where, "negative cluster id on action '" + a.name + "'");
    clusters.insert(a.cluster_id);
  }
  const auto n_clusters = spec.num_clusters();
  if (clusters.size() != n_clusters)
    invariant(where, "cluster ids must form a contiguous range 0..C-1");

  const auto& r = spec.reward;
  switch (r.kind) {
    case RewardKind::scaled_effort:
    case RewardKind::competency_increase:
      if (r.lo != -1.0 || r.hi != 1.0) invariant(where, "effort-based reward range must be exactly [-1, 1]");
      break;
    case RewardKind::completion_with_diversity_cost:
      if (r.lo != 0.0 || r.hi != 1.0) invariant(where, "completion reward range must be [0, 1]");
      if (!r.diversity_weight) invariant(where, "completion_with_diversity_cost requires diversity_weight");
      if (*r.diversity_weight < 0.0) invariant(where, "diversity_weight must be nonnegative");
      break;
  }
  if (spec.criterion != criterion_for(r.kind))
    invariant(where, "criterion '" + std::string(to_string(spec.criterion)) +
                         "' does not match reward kind '" + std::string(to_string(r.kind)) + "'");
  if (spec.hook != hook_for(r.kind))
    invariant(where, "hook '" + std::string(to_string(spec.hook)) + "' does not match reward kind");

  const auto n_det = spec.num_deterministic_features();
  switch (spec.hook) {
    case DeterministicHook::none:
      if (n_det != 0) invariant(where, "deterministic features need a competency or diversity hook");
      break;
    case DeterministicHook::competency:
      if (n_det == 0) invariant(where, "competency hook needs deterministic competency features");
      for (const auto& a : spec.actions) {
        if (a.contribution.size() != n_det)
          invariant(where, "action '" + a.name + "' needs one contribution per competency");
        for (double c : a.contribution)
          if (c < 0.0 || c > 1.0) invariant(where, "contribution outside [0, 1] on '" + a.name + "'");
      }
      break;
    case DeterministicHook::diversity:
      if (n_det == 0) invariant(where, "diversity hook needs deterministic counter features");
      for (const auto& a : spec.actions)
        if (!a.strategy || *a.strategy < 0 || static_cast<std::size_t>(*a.strategy) >= n_det)
          invariant(where, "action '" + a.name + "' needs a strategy index below the counter count");
      break;
  }
  if (spec.default_horizon < 1) invariant(where, "default_horizon must be >= 1");
}

StudySpec parse_study_spec(std::string_view text, const std::string& source_name,
                           const std::filesystem::path& base_dir) {
  const json doc = parse_keyed_config(text, source_name);
  StudySpec spec;
  if (!doc.contains("study")) invariant(source_name, "missing [study] section");
  const json& st = doc["study"];
  const std::string sw = config_location(st, source_name) + " [study]";
  spec.study_id = required<std::string>(st, "id", sw);
  spec.title = optional_key<std::string>(st, "title", sw).value_or(spec.study_id);
  spec.default_horizon = optional_key<int>(st, "default_horizon", sw).value_or(20);
  spec.prompt_dir = base_dir / optional_key<std::string>(st, "prompt_set", sw).value_or("../prompts");
  spec.prompt_dir = spec.prompt_dir.lexically_normal();
  if (auto lengths = optional_key<std::vector<std::string>>(st, "prompt_lengths", sw)) {
    for (const auto& l : *lengths) spec.prompt_lengths.push_back(parse_prompt_length(l));
  } else {
    spec.prompt_lengths = {PromptLength::base, PromptLength::extensive};
  }

  if (!doc.contains("reward")) invariant(source_name, "missing [reward] section");
  const json& rw = doc["reward"];
  const std::string rwhere = config_location(rw, source_name) + " [reward]";
  spec.reward.kind = parse_reward_kind(required<std::string>(rw, "kind", rwhere), rwhere);
  auto range = required<std::vector<double>>(rw, "range", rwhere);
  if (range.size() != 2 || !(range[0] < range[1])) invariant(rwhere, "range must be [lo, hi] with lo < hi");
  spec.reward.lo = range[0];
  spec.reward.hi = range[1];
  spec.reward.diversity_weight = optional_key<double>(rw, "diversity_weight", rwhere);

  spec.criterion = parse_criterion(
      optional_key<std::string>(st, "criterion", sw).value_or(std::string(to_string(criterion_for(spec.reward.kind)))),
      sw);
  if (auto hook = optional_key<std::string>(st, "hook", sw)) {
    spec.hook = parse_hook(*hook);
  } else {
    spec.hook = hook_for(spec.reward.kind);
  }

  if (doc.contains("feature")) {
    for (const json& ft : doc["feature"]) {
      const std::string fw = config_location(ft, source_name) + " [[feature]]";
      FeatureDef f;
      f.name = required<std::string>(ft, "name", fw);
      f.role = parse_role(optional_key<std::string>(ft, "role", fw).value_or("learned"), fw);
      f.cardinality = required<int>(ft, "cardinality", fw);
      f.value_labels = required<std::vector<std::string>>(ft, "value_labels", fw);
      f.question = optional_key<std::string>(ft, "question", fw).value_or(f.name);
      if (auto scale = optional_key<std::vector<int>>(ft, "raw_scale", fw)) {
        if (scale->size() != 2 || (*scale)[0] >= (*scale)[1])
          invariant(fw + " '" + f.name + "'", "raw_scale must be [lo, hi] with lo < hi");
        f.raw_scale = std::make_pair((*scale)[0], (*scale)[1]);
        if (auto edges = optional_key<std::vector<int>>(ft, "bin_edges", fw)) {
          f.bin_edges = *edges;
        } else if (f.cardinality >= 2) {
          f.bin_edges = equal_width_edges((*scale)[0], (*scale)[1], f.cardinality);
        }
      } else if (ft.contains("bin_edges")) {
        invariant(fw + " '" + f.name + "'", "bin_edges without raw_scale");
      }
      // Checked here as well so the message carries the line.
      if (f.cardinality < 2) invariant(fw + " '" + f.name + "'", "cardinality must be >= 2");
      if (f.value_labels.size() != static_cast<std::size_t>(f.cardinality))
        invariant(fw + " '" + f.name + "'", "value_labels must have exactly cardinality entries");
      spec.features.push_back(std::move(f));
    }
  }

  if (doc.contains("action")) {
    for (const json& at : doc["action"]) {
      const std::string aw = config_location(at, source_name) + " [[action]]";
      ActionDef a;
      a.id = required<int>(at, "id", aw);
      a.name = required<std::string>(at, "name", aw);
      a.cluster_id = optional_key<int>(at, "cluster", aw).value_or(a.id);
      a.text = optional_key<std::string>(at, "text", aw).value_or(a.name);
      a.full_text = optional_key<std::string>(at, "full_text", aw);
      a.contribution = optional_key<std::vector<double>>(at, "contribution", aw).value_or(std::vector<double>{});
      a.strategy = optional_key<int>(at, "strategy", aw);
      spec.actions.push_back(std::move(a));
    }
  }

  validate_study_spec(spec);
  return spec;
}

StudySpec load_study_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open study spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_study_spec(ss.str(), path.string(), path.parent_path());
}

std::filesystem::path asset_dir() {
  if (const char* env = std::getenv("BOOTRL_ASSET_DIR"); env && *env) return env;
#ifdef BOOTRL_DEFAULT_ASSET_DIR
  return BOOTRL_DEFAULT_ASSET_DIR;
#else
  return "assets";
#endif
}

std::filesystem::path bundled_study_path(int study_number) {
  return asset_dir() / "studies" / ("study" + std::to_string(study_number) + ".toml");
}

}  // namespace bootrl

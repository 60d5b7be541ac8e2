#include "bootrl/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bootrl/error.hpp"
#include "bootrl/ingest.hpp"
#include "bootrl/keyed_config.hpp"
#include "bootrl/rng.hpp"
#include "bootrl/sample_store.hpp"

namespace bootrl {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------- config

namespace {

[[noreturn]] void bad_config(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::invariant, where + ": " + what);
}

void check_keys(const json& table, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : table.items()) {
    if (key == "__line") continue;
    if (!allowed.count(key)) bad_config(where, "unknown key '" + key + "'");
  }
}

template <typename T>
std::optional<T> opt(const json& table, const char* key, const std::string& where) {
  if (!table.contains(key)) return std::nullopt;
  try {
    return table.at(key).get<T>();
  } catch (const json::exception&) {
    bad_config(where, std::string("key '") + key + "' has the wrong type");
  }
}

template <typename T>
void set(T& field, const json& table, const char* key, const std::string& where) {
  if (auto v = opt<T>(table, key, where)) field = *v;
}

fs::path resolve_study(const json& value, const fs::path& base, const std::string& where) {
  if (value.is_number_integer()) return bundled_study_path(value.get<int>());
  if (value.is_string()) {
    const std::string s = value.get<std::string>();
    if (!s.empty() && std::all_of(s.begin(), s.end(), ::isdigit)) return bundled_study_path(std::stoi(s));
    return (base / s).lexically_normal();
  }
  bad_config(where, "study must be a bundled study number or a path");
}

}  // namespace

std::uint64_t RunConfig::simulator_seed() const { return simulator.seed.value_or(derive_seed({seed, 1})); }
std::uint64_t RunConfig::sweep_seed() const { return sweep.seed.value_or(derive_seed({seed, 2})); }
std::uint64_t RunConfig::synthetic_seed() const { return data.synthetic_seed.value_or(derive_seed({seed, 3})); }

json RunConfig::snapshot() const {
  json plan_json{
      {"model", plan.model},
      {"variants", plan.variants},
      {"n_per_action", plan.n_per_action},
      {"length", std::string(to_string(plan.length))},
      {"style", std::string(to_string(plan.style))},
      {"few_shot_k", plan.few_shot_k},
      {"temperature", plan.temperature},
      {"top_p", plan.top_p},
      {"max_tokens", plan.max_tokens},
      {"seed", plan.seed},
      {"max_retries", plan.max_retries},
      {"endpoint", endpoint.kind},
  };
  if (endpoint.kind == "http") plan_json["url"] = endpoint.url + endpoint.path;
  json data_json{{"truth", data.truth}, {"synthetic_samples", data.synthetic_samples}};
  if (data.truth == "synthetic") {
    data_json["synthetic_seed"] = synthetic_seed();
    data_json["action_gap"] = data.synthetic.action_gap;
    data_json["state_noise"] = data.synthetic.state_noise;
    data_json["support"] = data.synthetic.support;
    data_json["action_independent_transitions"] = data.synthetic.action_independent_transitions;
  }
  if (data.real) data_json["real"] = data.real->filename().string();
  if (data.human) data_json["human"] = data.human->filename().string();
  return json{
      {"study", study_path.filename().string()},
      {"seed", seed},
      {"data", data_json},
      {"plan", plan_json},
      {"solver", {{"gamma", solver.gamma}, {"tolerance", solver.tolerance}, {"max_iterations", solver.max_iterations}}},
      {"simulator", {{"users", simulator.users}, {"horizon", simulator.horizon}, {"seed", simulator_seed()}}},
      {"sweep",
       {{"n_grid", sweep.n_grid},
        {"oracle_draws", sweep.oracle_draws},
        {"smoothing", sweep.smoothing},
        {"include_fallback", sweep.include_fallback},
        {"seed", sweep_seed()}}},
  };
}

std::string RunConfig::run_id() const {
  const std::string text = snapshot().dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < 8; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

RunConfig parse_run_config(std::string_view text, const std::string& source_name, const fs::path& base_dir) {
  const json root = parse_keyed_config(text, source_name);
  check_keys(root, {"run", "data", "plan", "solver", "simulator", "sweep"}, source_name);
  RunConfig cfg;
  const json empty = json::object();
  auto table = [&](const char* name) -> const json& { return root.contains(name) ? root[name] : empty; };
  auto where = [&](const char* name) { return root.contains(name) ? config_location(root[name], source_name) : source_name; };

  const json& run = table("run");
  const std::string rw = where("run");
  check_keys(run, {"study", "dir", "seed"}, rw);
  if (!run.contains("study")) bad_config(rw, "missing key 'study'");
  cfg.study_path = resolve_study(run["study"], base_dir, rw);
  cfg.run_dir = (base_dir / opt<std::string>(run, "dir", rw).value_or("run")).lexically_normal();
  set(cfg.seed, run, "seed", rw);

  const json& data = table("data");
  const std::string dw = where("data");
  check_keys(data, {"real", "human", "truth", "synthetic_seed", "synthetic_samples", "action_gap", "state_noise",
                    "support", "action_independent_transitions"},
             dw);
  if (auto p = opt<std::string>(data, "real", dw)) cfg.data.real = (base_dir / *p).lexically_normal();
  if (auto p = opt<std::string>(data, "human", dw)) cfg.data.human = (base_dir / *p).lexically_normal();
  set(cfg.data.truth, data, "truth", dw);
  if (cfg.data.truth != "real" && cfg.data.truth != "synthetic") bad_config(dw, "truth must be \"real\" or \"synthetic\"");
  cfg.data.synthetic_seed = opt<std::uint64_t>(data, "synthetic_seed", dw);
  set(cfg.data.synthetic_samples, data, "synthetic_samples", dw);
  set(cfg.data.synthetic.action_gap, data, "action_gap", dw);
  set(cfg.data.synthetic.state_noise, data, "state_noise", dw);
  set(cfg.data.synthetic.support, data, "support", dw);
  set(cfg.data.synthetic.action_independent_transitions, data, "action_independent_transitions", dw);

  const json& plan = table("plan");
  const std::string pw = where("plan");
  check_keys(plan, {"endpoint", "url", "path", "model", "variants", "n_per_action", "length", "style", "few_shot_k",
                    "temperature", "top_p", "max_tokens", "seed", "max_retries", "max_parallel", "backoff_ms",
                    "timeout_s"},
             pw);
  set(cfg.endpoint.kind, plan, "endpoint", pw);
  if (cfg.endpoint.kind != "mock" && cfg.endpoint.kind != "http") bad_config(pw, "endpoint must be \"mock\" or \"http\"");
  set(cfg.endpoint.url, plan, "url", pw);
  set(cfg.endpoint.path, plan, "path", pw);
  set(cfg.endpoint.backoff_ms, plan, "backoff_ms", pw);
  set(cfg.endpoint.timeout_s, plan, "timeout_s", pw);
  set(cfg.plan.model, plan, "model", pw);
  set(cfg.plan.variants, plan, "variants", pw);
  set(cfg.plan.n_per_action, plan, "n_per_action", pw);
  try {
    if (auto l = opt<std::string>(plan, "length", pw)) cfg.plan.length = parse_prompt_length(*l);
    if (auto s = opt<std::string>(plan, "style", pw)) cfg.plan.style = parse_prompt_style(*s);
  } catch (const Error& e) {
    bad_config(pw, e.what());
  }
  set(cfg.plan.few_shot_k, plan, "few_shot_k", pw);
  set(cfg.plan.temperature, plan, "temperature", pw);
  set(cfg.plan.top_p, plan, "top_p", pw);
  set(cfg.plan.max_tokens, plan, "max_tokens", pw);
  set(cfg.plan.max_retries, plan, "max_retries", pw);
  set(cfg.plan.max_parallel, plan, "max_parallel", pw);
  if (auto s = opt<std::uint64_t>(plan, "seed", pw)) {
    cfg.plan.seed = *s;
    cfg.plan_seed_set = true;
  } else {
    cfg.plan.seed = cfg.seed;
  }

  const json& solver = table("solver");
  const std::string sw = where("solver");
  check_keys(solver, {"gamma", "tolerance", "max_iterations"}, sw);
  set(cfg.solver.gamma, solver, "gamma", sw);
  set(cfg.solver.tolerance, solver, "tolerance", sw);
  set(cfg.solver.max_iterations, solver, "max_iterations", sw);
  try {
    cfg.solver.validate();
  } catch (const Error& e) {
    bad_config(sw, e.what());
  }

  const json& sim = table("simulator");
  const std::string mw = where("simulator");
  check_keys(sim, {"users", "horizon", "seed"}, mw);
  set(cfg.simulator.users, sim, "users", mw);
  set(cfg.simulator.horizon, sim, "horizon", mw);
  cfg.simulator.seed = opt<std::uint64_t>(sim, "seed", mw);

  const json& sweep = table("sweep");
  const std::string ww = where("sweep");
  check_keys(sweep, {"n_grid", "oracle_draws", "smoothing", "include_fallback", "seed"}, ww);
  set(cfg.sweep.n_grid, sweep, "n_grid", ww);
  set(cfg.sweep.oracle_draws, sweep, "oracle_draws", ww);
  set(cfg.sweep.smoothing, sweep, "smoothing", ww);
  set(cfg.sweep.include_fallback, sweep, "include_fallback", ww);
  cfg.sweep.seed = opt<std::uint64_t>(sweep, "seed", ww);
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_run_config(ss.str(), path.string(), path.parent_path());
  cfg.config_path = path;
  return cfg;
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.plan.seed = *o.seed;
    cfg.plan_seed_set = false;
    cfg.simulator.seed.reset();
    cfg.sweep.seed.reset();
    cfg.data.synthetic_seed.reset();
  }
  if (o.study) {
    const fs::path base = cfg.config_path.empty() ? fs::current_path() : cfg.config_path.parent_path();
    cfg.study_path = resolve_study(json(*o.study), base, "--study");
  }
  if (o.variants) cfg.plan.variants = *o.variants;
  if (o.n_per_action) cfg.plan.n_per_action = *o.n_per_action;
  if (o.temperature) cfg.plan.temperature = *o.temperature;
  if (o.few_shot_k) cfg.plan.few_shot_k = *o.few_shot_k;
  if (o.style) cfg.plan.style = *o.style;
  if (o.length) cfg.plan.length = *o.length;
  if (o.endpoint) {
    if (*o.endpoint != "mock" && *o.endpoint != "http")
      throw Error(ErrorKind::precondition, "--endpoint must be mock or http");
    cfg.endpoint.kind = *o.endpoint;
  }
  if (o.model) cfg.plan.model = *o.model;
  if (o.dir) cfg.run_dir = *o.dir;
}

// ---------------------------------------------------------------- serialization

json to_json(const DynamicsModel& m) {
  std::vector<int> fallback(m.fallback_flags().begin(), m.fallback_flags().end());
  return json{
      {"num_states", m.num_states()},
      {"num_actions", m.num_actions()},
      {"reward_range", {m.reward_lo(), m.reward_hi()}},
      {"reward", m.reward_table()},
      {"reward_count", m.reward_counts()},
      {"transition", m.transition_table()},
      {"transition_count", m.transition_counts()},
      {"fallback", fallback},
      {"status", m.status() == EstimationStatus::ok ? "ok" : "empty_input"},
  };
}

DynamicsModel dynamics_from_json(const json& j) {
  try {
    const auto range = j.at("reward_range").get<std::vector<double>>();
    if (range.size() != 2) throw Error(ErrorKind::parse, "reward_range must have two entries");
    const auto flags = j.at("fallback").get<std::vector<int>>();
    return DynamicsModel::restore(j.at("num_states").get<std::size_t>(), j.at("num_actions").get<std::size_t>(),
                                  range[0], range[1], j.at("reward").get<std::vector<double>>(),
                                  j.at("reward_count").get<std::vector<std::int64_t>>(),
                                  j.at("transition").get<std::vector<double>>(),
                                  j.at("transition_count").get<std::vector<std::int64_t>>(),
                                  std::vector<std::uint8_t>(flags.begin(), flags.end()),
                                  j.at("status").get<std::string>() == "ok" ? EstimationStatus::ok
                                                                            : EstimationStatus::empty_input);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed dynamics record: ") + e.what());
  }
}

json to_json(const GroundTruth& t) {
  return json{{"learned", to_json(t.learned)}, {"initial_distribution", t.initial_distribution}};
}

GroundTruth truth_from_json(const json& j) {
  try {
    return GroundTruth{dynamics_from_json(j.at("learned")), j.at("initial_distribution").get<std::vector<double>>()};
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed truth record: ") + e.what());
  }
}

json to_json(const Policy& p) {
  return json{
      {"role", std::string(to_string(p.role))},
      {"label", p.label},
      {"action_per_state", p.action_per_state},
      {"num_actions", p.num_actions},
      {"learned_states", p.learned_states},
      {"deterministic_states", p.deterministic_states},
      {"sampling", p.sampling},
      {"seed", p.seed},
  };
}

Policy policy_from_json(const json& j) {
  try {
    Policy p;
    p.role = parse_policy_role(j.at("role").get<std::string>());
    p.label = j.at("label").get<std::string>();
    p.action_per_state = j.at("action_per_state").get<std::vector<int>>();
    p.num_actions = j.at("num_actions").get<std::size_t>();
    p.learned_states = j.at("learned_states").get<std::size_t>();
    p.deterministic_states = j.at("deterministic_states").get<std::size_t>();
    p.sampling = j.at("sampling").get<bool>();
    p.seed = j.at("seed").get<std::uint64_t>();
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed policy record: ") + e.what());
  }
}

json to_json(const CriterionSeries& s) {
  return json{
      {"label", s.label},
      {"criterion", std::string(to_string(s.criterion))},
      {"timesteps", s.timesteps},
      {"instances", s.instances},
      {"mean", s.mean},
      {"ci_low", s.ci_low},
      {"ci_high", s.ci_high},
      {"std_error", s.std_error},
  };
}

CriterionSeries series_from_json(const json& j) {
  try {
    CriterionSeries s;
    s.label = j.at("label").get<std::string>();
    const std::string c = j.at("criterion").get<std::string>();
    if (c == "mean_reward") s.criterion = Criterion::mean_reward;
    else if (c == "competency_fraction") s.criterion = Criterion::competency_fraction;
    else if (c == "diversity_fraction") s.criterion = Criterion::diversity_fraction;
    else throw Error(ErrorKind::parse, "unknown criterion '" + c + "'");
    s.timesteps = j.at("timesteps").get<std::size_t>();
    s.instances = j.at("instances").get<std::size_t>();
    s.mean = j.at("mean").get<std::vector<double>>();
    s.ci_low = j.at("ci_low").get<std::vector<double>>();
    s.ci_high = j.at("ci_high").get<std::vector<double>>();
    s.std_error = j.at("std_error").get<std::vector<double>>();
    if (s.mean.size() != s.timesteps || s.ci_low.size() != s.timesteps || s.ci_high.size() != s.timesteps)
      throw Error(ErrorKind::parse, "series arrays do not match timesteps");
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed series record: ") + e.what());
  }
}

namespace {

json stat_json(const SweepStat& s) {
  return json{{"mean", s.mean}, {"ci_low", s.ci_low}, {"ci_high", s.ci_high}, {"instances", s.instances}};
}

SweepStat stat_from(const json& j) {
  return {j.at("mean").get<double>(), j.at("ci_low").get<double>(), j.at("ci_high").get<double>(),
          j.at("instances").get<std::size_t>()};
}

}  // namespace

json to_json(const L1Sweep& sw) {
  json cells = json::array();
  for (const SweepCell& c : sw.cells) {
    json cell{{"entity", c.entity}, {"kind", std::string(to_string(c.kind))}, {"n", c.n}, {"missing", c.missing}};
    if (c.reward) cell["reward"] = stat_json(*c.reward);
    if (c.transition) cell["transition"] = stat_json(*c.transition);
    cells.push_back(cell);
  }
  return json{{"n_grid", sw.n_grid}, {"cells", cells}};
}

L1Sweep sweep_from_json(const json& j) {
  try {
    L1Sweep sw;
    sw.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    for (const json& c : j.at("cells")) {
      SweepCell cell;
      cell.entity = c.at("entity").get<std::string>();
      const std::string kind = c.at("kind").get<std::string>();
      cell.kind = kind == "oracle" ? SweepEntityKind::oracle
                  : kind == "baseline" ? SweepEntityKind::baseline
                                       : SweepEntityKind::source;
      cell.n = c.at("n").get<std::size_t>();
      cell.missing = c.at("missing").get<bool>();
      if (c.contains("reward")) cell.reward = stat_from(c["reward"]);
      if (c.contains("transition")) cell.transition = stat_from(c["transition"]);
      sw.cells.push_back(std::move(cell));
    }
    return sw;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed sweep record: ") + e.what());
  }
}

std::string sha256_hex(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + file.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string safe_name(const std::string& label) {
  std::string out;
  for (char ch : label) out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' ? ch : '_';
  return out;
}

std::string variant_file(int variant) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "v%02d.json", variant);
  return buf;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::missing_input, "missing input file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out || !(out << text) || !out.flush()) throw Error(ErrorKind::io, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Subdirectories sorted by name, each holding vNN.json files.
std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir))
    if (directories ? e.is_directory() : (e.is_regular_file() && e.path().extension() == ".json"))
      out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<std::string> kNamedPolicies{"optimal", "worst", "random", "no_learned_dynamics", "human"};

}  // namespace

std::string provenance_label(const Sample& x) {
  return x.model_id.value_or(std::string(to_string(x.source))) + "|" +
         (x.prompt_length ? std::string(to_string(*x.prompt_length)) : "?") + "|" +
         (x.prompt_style ? std::string(to_string(*x.prompt_style)) : "?") + "|k" +
         std::to_string(x.few_shot_k.value_or(0)) + "|t" + shortest(x.temperature.value_or(0.0));
}

// ---------------------------------------------------------------- run

class Run::Manifest {
 public:
  Manifest(Run& run, std::string command) : run_(run), command_(std::move(command)), started_(utc_now()) {
    run_.manifest_ = this;
  }
  ~Manifest() { run_.manifest_ = nullptr; }

  void input(const fs::path& p) { inputs_[relative(p)] = sha256_hex(p); }
  void output(const fs::path& p) {
    outputs_[relative(p)] = sha256_hex(p);
    inputs_.erase(relative(p));
  }
  void note(const std::string& key, json value) { extra_[key] = std::move(value); }

  void finish() {
    const RunConfig& cfg = run_.config_;
    json doc{
        {"command", command_},
        {"run_id", cfg.run_id()},
        {"study_id", run_.spec_.study_id},
        {"config", cfg.snapshot()},
        {"seeds",
         {{"run", cfg.seed},
          {"plan", cfg.plan.seed},
          {"simulator", cfg.simulator_seed()},
          {"sweep", cfg.sweep_seed()},
          {"synthetic", cfg.synthetic_seed()}}},
        {"started_at", started_},
        {"finished_at", utc_now()},
    };
    json in = json::array(), out = json::array();
    for (const auto& [p, d] : inputs_) in.push_back({{"path", p}, {"sha256", d}});
    for (const auto& [p, d] : outputs_) out.push_back({{"path", p}, {"sha256", d}});
    doc["inputs"] = in;
    doc["outputs"] = out;
    if (!extra_.empty()) doc["details"] = extra_;
    write_text(run_.path("manifests/" + command_ + ".json"), doc.dump(2) + "\n");
  }

 private:
  std::string relative(const fs::path& p) const {
    const fs::path rel = fs::proximate(p, run_.config_.run_dir);
    const std::string s = rel.generic_string();
    return s.rfind("..", 0) == 0 ? fs::absolute(p).lexically_normal().generic_string() : s;
  }

  Run& run_;
  std::string command_;
  std::string started_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
  json extra_ = json::object();
};

Run::Run(RunConfig config) : config_(std::move(config)), spec_(load_study_spec(config_.study_path)) {
  if (config_.simulator.horizon == 0) config_.simulator.horizon = static_cast<std::size_t>(spec_.default_horizon);
}

std::vector<Sample> Run::load_store(const std::string& name) const {
  const fs::path p = path("samples/" + name + ".jsonl");
  if (!fs::exists(p)) return {};
  if (manifest_) manifest_->input(p);
  auto samples = read_samples(p);
  for (const Sample& x : samples) validate_sample(x, spec_);
  return samples;
}

std::vector<Sample> Run::real_samples() {
  const fs::path p = path("samples/real.jsonl");
  if (!fs::exists(p)) {
    std::vector<Sample> samples;
    if (config_.data.real) {
      if (manifest_) manifest_->input(*config_.data.real);
      samples = ingest_samples(*config_.data.real, spec_, SampleSource::real);
    } else if (config_.data.truth == "synthetic") {
      samples = sample_from_truth(truth(), spec_, config_.data.synthetic_samples,
                                  derive_seed({config_.synthetic_seed(), 0x73616d70ULL}));
    } else {
      return {};
    }
    write_samples(p, samples);
    if (manifest_) manifest_->output(p);
    return samples;
  }
  return load_store("real");
}

std::vector<Sample> Run::human_samples() {
  const fs::path p = path("samples/human.jsonl");
  if (!fs::exists(p) && config_.data.human) {
    if (manifest_) manifest_->input(*config_.data.human);
    auto samples = ingest_samples(*config_.data.human, spec_, SampleSource::human);
    write_samples(p, samples);
    if (manifest_) manifest_->output(p);
    return samples;
  }
  return load_store("human");
}

std::vector<Sample> Run::generated_samples() const { return load_store("generated"); }

GroundTruth Run::truth() {
  if (config_.data.truth == "synthetic")
    return make_synthetic_truth(spec_, config_.synthetic_seed(), config_.data.synthetic);
  const auto real = real_samples();
  if (real.empty())
    throw Error(ErrorKind::missing_input, "a real-data truth needs " + path("samples/real.jsonl").string() +
                                              " or a [data] real file");
  return ground_truth_from_samples(real, spec_);
}

void Run::ingest(const fs::path& input, SampleSource source) {
  if (source != SampleSource::real && source != SampleSource::human)
    throw Error(ErrorKind::precondition, "only real or human samples can be ingested");
  Manifest m(*this, "ingest");
  m.input(input);
  const auto samples = ingest_samples(input, spec_, source);
  if (samples.empty()) throw Error(ErrorKind::parse, input.string() + ": no sample rows");
  const fs::path p = path("samples/" + std::string(to_string(source)) + ".jsonl");
  SampleStore store(p);
  store.append(samples);
  m.output(p);
  m.note("rows", samples.size());
  m.finish();
}

void Run::export_store(SampleSource source, const fs::path& output) {
  Manifest m(*this, "export");
  std::vector<Sample> samples;
  if (source == SampleSource::real) samples = load_store("real");
  else if (source == SampleSource::human) samples = load_store("human");
  else samples = load_store("generated");
  if (samples.empty()) throw Error(ErrorKind::missing_input, "no " + std::string(to_string(source)) + " samples to export");
  export_samples(output, samples, spec_);
  m.output(output);
  m.finish();
}

CampaignStats Run::generate(CompletionEndpoint* endpoint) {
  Manifest m(*this, "generate");
  std::vector<Sample> real;
  if (config_.plan.few_shot_k > 0 || config_.data.truth == "real" || config_.data.truth == "synthetic")
    real = real_samples();
  std::unique_ptr<CompletionEndpoint> owned;
  if (!endpoint) {
    if (config_.endpoint.kind == "mock") {
      owned = std::make_unique<MockEndpoint>(spec_, truth());
    } else {
      HttpEndpointConfig hc;
      hc.url = config_.endpoint.url;
      hc.path = config_.endpoint.path;
      if (const char* key = std::getenv("BOOTRL_API_KEY")) hc.api_key = key;
      hc.max_parallel = config_.plan.max_parallel;
      hc.backoff = std::chrono::milliseconds(config_.endpoint.backoff_ms);
      hc.timeout = std::chrono::seconds(config_.endpoint.timeout_s);
      owned = std::make_unique<HttpChatEndpoint>(hc);
    }
    endpoint = owned.get();
  }
  const fs::path p = path("samples/generated.jsonl");
  SampleStore store(p);
  if (fs::exists(p)) m.input(p);
  const CampaignStats stats = run_campaign(spec_, config_.plan, *endpoint, real, store);
  if (fs::exists(p)) m.output(p);
  const EndpointStats es = endpoint->stats();
  m.note("campaign", {{"planned", stats.planned},
                      {"already_present", stats.already_present},
                      {"generated", stats.generated},
                      {"failed", stats.failed},
                      {"parse_failures", stats.parse_failures},
                      {"endpoint_errors", stats.endpoint_errors},
                      {"interrupted", stats.interrupted},
                      {"requests", es.requests},
                      {"retries", es.retries},
                      {"rate_limited", es.rate_limited}});
  m.finish();
  return stats;
}

void Run::estimate() {
  Manifest m(*this, "estimate");
  const GroundTruth t = truth();
  const fs::path truth_path = path("dynamics/truth.json");
  write_text(truth_path, to_json(t).dump(2) + "\n");
  m.output(truth_path);

  const auto human = human_samples();
  const fs::path human_path = path("dynamics/human.json");
  fs::remove(human_path);
  if (!human.empty()) {
    json j = to_json(estimate_dynamics(human, spec_, config_.sweep.smoothing));
    j["label"] = "human";
    write_text(human_path, j.dump(2) + "\n");
    m.output(human_path);
  }

  fs::remove_all(path("dynamics/generated"));
  std::map<std::string, std::map<int, std::vector<Sample>>> groups;
  for (Sample& x : generated_samples()) groups[provenance_label(x)][x.prompt_variant.value_or(0)].push_back(std::move(x));
  for (const auto& [label, variants] : groups)
    for (const auto& [variant, samples] : variants) {
      json j = to_json(estimate_dynamics(samples, spec_, config_.sweep.smoothing));
      j["label"] = label;
      j["variant"] = variant;
      j["samples"] = samples.size();
      const fs::path p = path("dynamics/generated/" + safe_name(label) + "/" + variant_file(variant));
      write_text(p, j.dump(2) + "\n");
      m.output(p);
    }
  m.finish();
}

void Run::solve() {
  Manifest m(*this, "solve");
  const fs::path truth_path = path("dynamics/truth.json");
  if (!fs::exists(truth_path))
    throw Error(ErrorKind::missing_input, "missing dynamics file " + truth_path.string() + " (run estimate first)");
  m.input(truth_path);
  const GroundTruth t = truth_from_json(read_json(truth_path));

  auto emit = [&](const std::string& rel, Policy p) {
    const fs::path out = path("policies/" + rel);
    write_text(out, to_json(p).dump(2) + "\n");
    m.output(out);
  };
  Policy best = solve_policy(spec_, t.learned, config_.solver, PolicyRole::optimal);
  best.label = "optimal";
  emit("optimal.json", best);
  Policy worst = solve_policy(spec_, t.learned, config_.solver, PolicyRole::worst);
  worst.label = "worst";
  emit("worst.json", worst);
  Policy rnd = random_policy(spec_, derive_seed({config_.seed, 0x72616e64ULL}));
  rnd.label = "random";
  emit("random.json", rnd);
  fs::remove(path("policies/no_learned_dynamics.json"));
  if (spec_.hook != DeterministicHook::none) {
    Policy nld = no_learned_dynamics_policy(spec_, config_.solver);
    nld.label = "no_learned_dynamics";
    emit("no_learned_dynamics.json", nld);
  }
  fs::remove(path("policies/human.json"));
  if (fs::exists(path("dynamics/human.json"))) {
    m.input(path("dynamics/human.json"));
    Policy h = solve_policy(spec_, dynamics_from_json(read_json(path("dynamics/human.json"))), config_.solver,
                            PolicyRole::human);
    h.label = "human";
    emit("human.json", h);
  }
  fs::remove_all(path("policies/generated"));
  for (const fs::path& dir : sorted_entries(path("dynamics/generated"), true))
    for (const fs::path& file : sorted_entries(dir, false)) {
      m.input(file);
      const json j = read_json(file);
      Policy g = solve_policy(spec_, dynamics_from_json(j), config_.solver, PolicyRole::generated);
      g.label = j.at("label").get<std::string>();
      emit("generated/" + dir.filename().string() + "/" + file.filename().string(), g);
    }
  m.finish();
}

void Run::simulate() {
  Manifest m(*this, "simulate");
  const fs::path optimal = path("policies/optimal.json");
  if (!fs::exists(optimal))
    throw Error(ErrorKind::missing_input, "missing policy file " + optimal.string() + " (run solve first)");
  const fs::path truth_path = path("dynamics/truth.json");
  if (!fs::exists(truth_path))
    throw Error(ErrorKind::missing_input, "missing dynamics file " + truth_path.string() + " (run estimate first)");
  m.input(truth_path);
  const GroundTruth t = truth_from_json(read_json(truth_path));
  const auto& sc = config_.simulator;

  auto run_policy = [&](const fs::path& file) {
    m.input(file);
    return simulate_policy(policy_from_json(read_json(file)), t, spec_, sc.users, sc.horizon,
                           config_.simulator_seed());
  };
  for (const std::string& name : kNamedPolicies) {
    const fs::path file = path("policies/" + name + ".json");
    const fs::path out = path("series/" + name + ".json");
    fs::remove(out);
    if (!fs::exists(file)) continue;
    CriterionSeries s = run_policy(file);
    s.label = name;
    write_text(out, to_json(s).dump(2) + "\n");
    m.output(out);
  }
  fs::remove_all(path("series/generated"));
  for (const fs::path& dir : sorted_entries(path("policies/generated"), true)) {
    std::vector<CriterionSeries> instances;
    std::string label;
    for (const fs::path& file : sorted_entries(dir, false)) {
      instances.push_back(run_policy(file));
      label = policy_from_json(read_json(file)).label;
    }
    if (instances.empty()) continue;
    const fs::path out = path("series/generated/" + dir.filename().string() + ".json");
    write_text(out, to_json(aggregate_series(instances, label)).dump(2) + "\n");
    m.output(out);
  }
  m.finish();
}

void Run::sweep() {
  Manifest m(*this, "sweep");
  const fs::path truth_path = path("dynamics/truth.json");
  if (!fs::exists(truth_path))
    throw Error(ErrorKind::missing_input, "missing dynamics file " + truth_path.string() + " (run estimate first)");
  m.input(truth_path);
  const GroundTruth t = truth_from_json(read_json(truth_path));
  const auto real = real_samples();
  if (real.empty()) throw Error(ErrorKind::missing_input, "the oracle needs real samples (samples/real.jsonl)");

  std::map<std::string, SweepSource> by_label;
  for (Sample& x : generated_samples()) {
    const std::string label = provenance_label(x);
    auto& src = by_label[label];
    src.label = label;
    src.samples.push_back(std::move(x));
  }
  std::vector<SweepSource> sources;
  for (auto& [label, src] : by_label) sources.push_back(std::move(src));
  auto human = human_samples();
  if (!human.empty()) sources.push_back({"human", SweepSourceKind::human, std::move(human)});

  SweepConfig sc;
  sc.n_grid = config_.sweep.n_grid;
  sc.oracle_draws = config_.sweep.oracle_draws;
  sc.seed = config_.sweep_seed();
  sc.smoothing = config_.sweep.smoothing;
  sc.l1.include_fallback = config_.sweep.include_fallback;
  const L1Sweep result = bootrl::sweep(sources, real, spec_, t.learned, sc);
  const fs::path out = path("sweep/l1_sweep.json");
  write_text(out, to_json(result).dump(2) + "\n");
  m.output(out);
  m.finish();
}

void Run::report() {
  Manifest m(*this, "report");
  const std::string header = "# manifest=manifests/report.json run_id=" + config_.run_id() + "\n";
  bool any = false;

  std::vector<fs::path> series_files;
  for (const std::string& name : kNamedPolicies)
    if (fs::exists(path("series/" + name + ".json"))) series_files.push_back(path("series/" + name + ".json"));
  for (const fs::path& f : sorted_entries(path("series/generated"), false)) series_files.push_back(f);
  if (!series_files.empty()) {
    std::string text = header + "entity\tt\tmean\tci_low\tci_high\n";
    for (const fs::path& f : series_files) {
      m.input(f);
      const CriterionSeries s = series_from_json(read_json(f));
      for (std::size_t t = 0; t < s.timesteps; ++t)
        text += s.label + "\t" + std::to_string(t + 1) + "\t" + shortest(s.mean[t]) + "\t" + shortest(s.ci_low[t]) +
                "\t" + shortest(s.ci_high[t]) + "\n";
    }
    const fs::path out = path("reports/policy_performance.tsv");
    write_text(out, text);
    m.output(out);
    any = true;
  }

  const fs::path sweep_path = path("sweep/l1_sweep.json");
  if (fs::exists(sweep_path)) {
    m.input(sweep_path);
    const L1Sweep sw = sweep_from_json(read_json(sweep_path));
    for (const bool reward : {true, false}) {
      std::string text = header + "entity\tn\tmean\tci_low\tci_high\n";
      for (const SweepCell& c : sw.cells) {
        const auto& stat = reward ? c.reward : c.transition;
        if (c.kind == SweepEntityKind::baseline && !stat) continue;
        const std::string entity = c.kind == SweepEntityKind::baseline ? "baseline:" + c.entity : c.entity;
        text += entity + "\t" + std::to_string(c.n) + "\t";
        if (stat)
          text += shortest(stat->mean) + "\t" + shortest(stat->ci_low) + "\t" + shortest(stat->ci_high) + "\n";
        else
          text += "NA\tNA\tNA\n";
      }
      const fs::path out = path(reward ? "reports/l1_reward.tsv" : "reports/l1_transition.tsv");
      write_text(out, text);
      m.output(out);
    }
    any = true;
  }
  if (!any)
    throw Error(ErrorKind::missing_input, "nothing to report: no series/ or sweep/l1_sweep.json in " +
                                              config_.run_dir.string());
  m.finish();
}

void Run::pipeline(CompletionEndpoint* endpoint) {
  generate(endpoint);
  estimate();
  solve();
  simulate();
  sweep();
  report();
}

}  // namespace bootrl

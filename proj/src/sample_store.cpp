#include "bootrl/sample_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <tuple>

#include "bootrl/error.hpp"

namespace bootrl {

using nlohmann::json;

namespace {

template <typename T>
void put(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

}  // namespace

json sample_to_json(const Sample& x) {
  json j{
      {"state", x.state.values},
      {"action", x.action_id},
      {"reward", x.reward},
      {"next_state", x.next_state.values},
      {"source", std::string(to_string(x.source))},
  };
  put(j, "model_id", x.model_id);
  put(j, "prompt_variant", x.prompt_variant);
  if (x.prompt_length) j["prompt_length"] = std::string(to_string(*x.prompt_length));
  if (x.prompt_style) j["prompt_style"] = std::string(to_string(*x.prompt_style));
  put(j, "few_shot_k", x.few_shot_k);
  put(j, "temperature", x.temperature);
  put(j, "seed", x.seed);
  put(j, "slot", x.slot);
  return j;
}

Sample sample_from_json(const json& j) {
  Sample x;
  try {
    x.state.values = j.at("state").get<std::vector<int>>();
    x.action_id = j.at("action").get<int>();
    x.reward = j.at("reward").get<double>();
    x.next_state.values = j.at("next_state").get<std::vector<int>>();
    x.source = parse_sample_source(j.at("source").get<std::string>());
    x.model_id = get_opt<std::string>(j, "model_id");
    x.prompt_variant = get_opt<int>(j, "prompt_variant");
    if (auto l = get_opt<std::string>(j, "prompt_length")) x.prompt_length = parse_prompt_length(*l);
    if (auto s = get_opt<std::string>(j, "prompt_style")) x.prompt_style = parse_prompt_style(*s);
    x.few_shot_k = get_opt<int>(j, "few_shot_k");
    x.temperature = get_opt<double>(j, "temperature");
    x.seed = get_opt<std::uint64_t>(j, "seed");
    x.slot = get_opt<int>(j, "slot");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed sample record: ") + e.what());
  }
  return x;
}

bool canonical_less(const Sample& a, const Sample& b) {
  auto key = [](const Sample& x) {
    return std::make_tuple(x.source, x.model_id, x.prompt_length, x.prompt_style, x.few_shot_k,
                           x.temperature, x.seed, x.prompt_variant, x.action_id, x.slot);
  };
  if (a.source == SampleSource::real && b.source == SampleSource::real) return false;
  return key(a) < key(b);
}

std::vector<Sample> read_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open sample store " + path.string());
  std::vector<Sample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(sample_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_samples(const std::filesystem::path& path, std::span<const Sample> samples) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    for (const Sample& x : samples) out << sample_to_json(x).dump() << '\n';
    if (!out.flush()) throw Error(ErrorKind::io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

SampleStore::SampleStore(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  auto lock = path_;
  lock += ".lock";
  lock_fd_ = ::open(lock.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (lock_fd_ < 0) throw Error(ErrorKind::io, "cannot open lock file " + lock.string());
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    throw Error(ErrorKind::io, "sample store " + path_.string() + " is locked by another writer");
  }
}

SampleStore::~SampleStore() {
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

std::vector<Sample> SampleStore::load() const {
  if (!std::filesystem::exists(path_)) return {};
  return read_samples(path_);
}

void SampleStore::append(std::span<const Sample> samples) {
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error(ErrorKind::io, "cannot append to " + path_.string());
  for (const Sample& x : samples) out << sample_to_json(x).dump() << '\n';
  if (!out.flush()) throw Error(ErrorKind::io, "append failed for " + path_.string());
}

void SampleStore::compact() {
  auto samples = load();
  std::stable_sort(samples.begin(), samples.end(), canonical_less);
  write_samples(path_, samples);
}

}  // namespace bootrl

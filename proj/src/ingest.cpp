#include "bootrl/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "bootrl/error.hpp"

namespace bootrl {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  for (char ch : line) {
    if (ch == delim) {
      out.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  out.push_back(cell);
  for (auto& c : out) {
    const auto b = c.find_first_not_of(" \t");
    const auto e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end && !s.empty();
}

}  // namespace

std::vector<Sample> parse_sample_table(std::string_view text, const StudySpec& spec, SampleSource source,
                                       const std::string& source_name) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](ErrorKind kind, const std::string& what) -> Error {
    return Error(kind, source_name + ":" + std::to_string(lineno) + ": " + what);
  };

  std::vector<std::string> header;
  char delim = ',';
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    delim = line.find('\t') != std::string::npos ? '\t' : ',';
    header = split(line, delim);
    break;
  }
  if (header.empty()) throw Error(ErrorKind::parse, source_name + ": empty sample table");

  const std::size_t K = spec.num_learned_features();
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!column.emplace(header[i], i).second) throw fail(ErrorKind::parse, "duplicate column '" + header[i] + "'");
  }
  std::vector<std::string> expected;
  for (std::size_t k = 0; k < K; ++k) expected.push_back(spec.learned_feature(k).name);
  expected.push_back("action");
  expected.push_back("reward");
  for (std::size_t k = 0; k < K; ++k) expected.push_back("next_" + spec.learned_feature(k).name);
  for (const auto& name : expected)
    if (!column.count(name)) throw fail(ErrorKind::parse, "missing column '" + name + "'");
  for (const auto& name : header)
    if (std::find(expected.begin(), expected.end(), name) == expected.end())
      throw fail(ErrorKind::parse, "unknown column '" + name + "'");

  std::map<std::string, int> action_by_name;
  for (const auto& a : spec.actions) action_by_name[a.name] = a.id;

  std::vector<Sample> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line, delim);
    if (cells.size() != header.size())
      throw fail(ErrorKind::parse, "expected " + std::to_string(header.size()) + " fields, found " +
                                       std::to_string(cells.size()));
    Sample x;
    x.source = source;
    auto feature_value = [&](const std::string& col, std::size_t k) {
      int v = 0;
      const std::string& cell = cells[column.at(col)];
      if (!parse_number(cell, v)) throw fail(ErrorKind::parse, "column '" + col + "': '" + cell + "' is not an integer");
      const FeatureDef& f = spec.learned_feature(k);
      if (v < 0 || v >= f.cardinality)
        throw fail(ErrorKind::out_of_range, "column '" + col + "': value " + cell + " outside 0.." +
                                                std::to_string(f.cardinality - 1));
      return v;
    };
    for (std::size_t k = 0; k < K; ++k) {
      x.state.values.push_back(feature_value(spec.learned_feature(k).name, k));
      x.next_state.values.push_back(feature_value("next_" + spec.learned_feature(k).name, k));
    }
    const std::string& act = cells[column.at("action")];
    int id = 0;
    if (parse_number(act, id)) {
      if (id < 0 || static_cast<std::size_t>(id) >= spec.actions.size())
        throw fail(ErrorKind::out_of_range, "action id " + act + " not in study " + spec.study_id);
      x.action_id = id;
    } else if (auto it = action_by_name.find(act); it != action_by_name.end()) {
      x.action_id = it->second;
    } else {
      throw fail(ErrorKind::parse, "unknown action '" + act + "'");
    }
    const std::string& rw = cells[column.at("reward")];
    if (!parse_number(rw, x.reward) || !std::isfinite(x.reward))
      throw fail(ErrorKind::parse, "reward '" + rw + "' is not a number");
    if (!spec.reward.contains(x.reward))
      throw fail(ErrorKind::out_of_range, "reward " + rw + " outside the study's reward range");
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<Sample> ingest_samples(const std::filesystem::path& path, const StudySpec& spec, SampleSource source) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sample_table(ss.str(), spec, source, path.string());
}

std::string format_sample_table(std::span<const Sample> samples, const StudySpec& spec) {
  const std::size_t K = spec.num_learned_features();
  std::string out;
  for (std::size_t k = 0; k < K; ++k) out += spec.learned_feature(k).name + ",";
  out += "action,reward";
  for (std::size_t k = 0; k < K; ++k) out += ",next_" + spec.learned_feature(k).name;
  out += "\n";
  for (const Sample& x : samples) {
    validate_sample(x, spec);
    for (int v : x.state.values) out += std::to_string(v) + ",";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x.reward);
    out += std::to_string(x.action_id) + "," + std::string(buf, p);
    for (int v : x.next_state.values) out += "," + std::to_string(v);
    out += "\n";
  }
  return out;
}

void export_samples(const std::filesystem::path& path, std::span<const Sample> samples, const StudySpec& spec) {
  const std::string text = format_sample_table(samples, spec);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out || !(out << text)) throw Error(ErrorKind::io, "cannot write " + path.string());
}

}  // namespace bootrl

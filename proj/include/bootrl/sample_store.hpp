#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bootrl/study.hpp"

namespace bootrl {

nlohmann::json sample_to_json(const Sample& sample);
Sample sample_from_json(const nlohmann::json& j);

// Canonical order for generated samples: provenance fields, then variant,
// action and slot. Real samples keep their relative order.
bool canonical_less(const Sample& a, const Sample& b);

// JSON Lines without locking. Errors carry "file:line".
std::vector<Sample> read_samples(const std::filesystem::path& path);
// Atomically replaces the file (write to a temporary, then rename).
void write_samples(const std::filesystem::path& path, std::span<const Sample> samples);

// Append-only JSONL store held under an exclusive lock on "<path>.lock" for
// the lifetime of the object. A second store on the same path fails with
// Error(io) instead of interleaving writes.
class SampleStore {
 public:
  explicit SampleStore(std::filesystem::path path);
  ~SampleStore();
  SampleStore(const SampleStore&) = delete;
  SampleStore& operator=(const SampleStore&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::vector<Sample> load() const;
  // Appends and flushes.
  void append(std::span<const Sample> samples);
  // Rewrites the file in canonical order, so equal contents give equal bytes.
  void compact();

 private:
  std::filesystem::path path_;
  int lock_fd_ = -1;
};

}  // namespace bootrl

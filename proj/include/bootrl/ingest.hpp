#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bootrl/study.hpp"

namespace bootrl {

// Delimited sample table (comma, or tab when the header has tabs). Header
// columns: each learned feature name (bin index), "action" (id or name),
// "reward", and "next_<feature>" for each learned feature, in any order.
// Errors name the source and line.
std::vector<Sample> parse_sample_table(std::string_view text, const StudySpec& spec, SampleSource source,
                                       const std::string& source_name);
std::vector<Sample> ingest_samples(const std::filesystem::path& path, const StudySpec& spec,
                                   SampleSource source);

// Writes the same CSV layout; rewards use the shortest exact representation,
// so export followed by ingest reproduces the samples.
std::string format_sample_table(std::span<const Sample> samples, const StudySpec& spec);
void export_samples(const std::filesystem::path& path, std::span<const Sample> samples,
                    const StudySpec& spec);

}  // namespace bootrl

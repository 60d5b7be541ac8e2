#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace bootrl {

// Reader for the keyed plain-text configuration format used by study specs
// and run configs. It is the TOML subset the repo needs:
//
//   # comment
//   [table]            [a.b]  (dotted names nest)
//   [[array_of_tables]]
//   key = "string" | 'literal' | 42 | -1.5e3 | true | [1, 2, "x"]
//
// Arrays may span lines. Inline tables and dates are rejected. Every table
// object carries a "__line" member with the 1-based line of its header so
// that validators can report locations.
nlohmann::json parse_keyed_config(std::string_view text,
                                  const std::string& source_name = "<input>");

nlohmann::json load_keyed_config(const std::filesystem::path& path);

// "file:line" for a parsed table, for error messages.
std::string config_location(const nlohmann::json& table, const std::string& source);

}  // namespace bootrl

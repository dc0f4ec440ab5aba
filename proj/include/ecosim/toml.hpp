#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

namespace ecosim::toml {

// Parses a practical TOML subset into a JSON object tree:
//   - [table] and [dotted.table] headers
//   - key = value with bare or dotted keys
//   - strings with \" \\ \n \t \r escapes, integers, floats, booleans
//   - (nested) arrays, which may span lines
//   - # comments
// Dates, inline tables and arrays-of-tables are not supported; scenario
// files do not need them. Throws std::runtime_error with a line number on
// malformed input.
nlohmann::json parse(std::string_view text);

// Convenience: read a file and dispatch on extension (.toml vs .json).
nlohmann::json parse_file(const std::string& path);

}  // namespace ecosim::toml

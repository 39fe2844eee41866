#pragma once

#include <string>

#include "json.hpp"

namespace ntklab {

// Minimal TOML subset -> json tree: single-level [section] tables, string /
// bool / integer / float scalars, homogeneous scalar arrays, '#' comments.
// Errors carry the offending line number.
nlohmann::json toml_parse(const std::string& text);

}  // namespace ntklab

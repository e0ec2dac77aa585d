#pragma once

// Report serialization: structured JSON records and flat CSV ladders.

#include <filesystem>
#include <string>

#include "curvflux/calculus.hpp"
#include "json.hpp"

namespace curvflux::report {

using Json = nlohmann::ordered_json;

/// Finite doubles as numbers, non-finite ones as null.
Json number(double v);

Json ladder_json(const calculus::Ladder& l);

/// Columns level,h,value,error-estimate,order; empty cells where undefined.
std::string ladder_csv(const calculus::Ladder& l);

/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

/// Writes the file, creating parent directories; throws std::runtime_error.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace curvflux::report

#pragma once

#include "hvgan/moo.hpp"

#include <filesystem>
#include <istream>
#include <string>

namespace hvgan {

/// One objective vector per line, comma separated, no header. Blank lines are
/// skipped. Ragged rows and non-numeric fields throw ValidationError naming
/// the 1-based line.
[[nodiscard]] auto parse_points_csv(std::istream& in, Orientation orientation) -> PointSet;
[[nodiscard]] auto read_points_csv(const std::filesystem::path& path, Orientation orientation) -> PointSet;

/// Parses "a,b,c" into numbers (used for --ref style flags).
[[nodiscard]] auto parse_number_list(const std::string& text) -> std::vector<double>;

} // namespace hvgan

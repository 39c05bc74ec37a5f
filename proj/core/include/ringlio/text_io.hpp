#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ringlio {

/// Numeric CSV contents with the source line of every row (for diagnostics).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;
};

/// Reads a comma-separated numeric file whose first line must equal
/// `expected_header`. Blank lines are skipped; anything else malformed throws
/// ParseError naming the line.
CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected_header);

/// Parses a full token as a double; returns false on trailing garbage.
bool parse_double(std::string_view token, double& out);

std::string_view trim(std::string_view s);

}  // namespace ringlio

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "evsurprise/point_set.hpp"

namespace evsurprise {

struct CsvTable {
  std::vector<std::string> header;
  PointSet data;
};

/// Numeric CSV with a required header row. Lines starting with '#' and blank
/// lines are ignored. Missing fields ("" or NA) raise ParseError unless
/// `drop_incomplete` is set, in which case the row is skipped.
CsvTable parse_csv(std::string_view text, bool drop_incomplete = false);
CsvTable read_csv(const std::filesystem::path& path, bool drop_incomplete = false);

// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

// header line plus one line per row; `preamble` lines are written first,
// each prefixed with "# ".
std::string csv_text(const std::vector<std::string>& header, const PointSet& rows,
                     const std::vector<std::string>& preamble = {});

std::string read_text_file(const std::filesystem::path& path);
// Creates parent directories. Throws IoError naming the path on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace evsurprise

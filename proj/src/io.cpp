#include "evsurprise/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "evsurprise/error.hpp"

namespace evsurprise {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool is_missing(std::string_view f) { return f.empty() || f == "NA" || f == "na" || f == "NaN" || f == "nan"; }

}  // namespace

CsvTable parse_csv(std::string_view text, bool drop_incomplete) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  CsvTable table;
  bool have_header = false;
  std::size_t line_no = 0;
  std::vector<double> row;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      for (auto f : fields) {
        if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
        if (f.empty()) throw ParseError(line_no, "empty column name in header");
        table.header.emplace_back(f);
      }
      table.data = PointSet(table.header.size(), {});
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      throw ParseError(line_no, "expected " + std::to_string(table.header.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    row.clear();
    bool incomplete = false;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const auto f = fields[k];
      if (is_missing(f)) {
        if (!drop_incomplete)
          throw ParseError(line_no, "missing value in column '" + table.header[k] +
                                        "' (use --drop-incomplete-rows to skip such rows)");
        incomplete = true;
        break;
      }
      double v = 0.0;
      const char* first = f.data();
      if (!f.empty() && f.front() == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v))
        throw ParseError(line_no, "not a finite number in column '" + table.header[k] + "': '" +
                                      std::string(f) + "'");
      row.push_back(v);
    }
    if (!incomplete) table.data.push_row(row);
  }
  if (!have_header) throw ParseError(std::max<std::size_t>(line_no, 1), "missing header row");
  if (table.data.empty()) throw ParseError(line_no, "no data rows");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path, bool drop_incomplete) {
  return parse_csv(read_text_file(path), drop_incomplete);
}

std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw IoError("cannot format number");
  return {buf.data(), ptr};
}

std::string csv_text(const std::vector<std::string>& header, const PointSet& rows,
                     const std::vector<std::string>& preamble) {
  if (header.size() != rows.dim) throw UsageError("CSV header does not match the row width");
  std::string out;
  for (const auto& p : preamble) out += "# " + p + "\n";
  for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
  out += '\n';
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    for (std::size_t k = 0; k < rows.dim; ++k) {
      if (k) out += ',';
      out += format_double(rows.at(i, k));
    }
    out += '\n';
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace evsurprise

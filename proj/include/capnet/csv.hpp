#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace capnet::csv {

using Row = std::vector<std::string>;

/// Parsed comma-separated document. Lines starting with '#' are collected as
/// comments; the first non-comment line is the header.
struct Document {
  std::vector<std::string> comments;
  Row header;
  std::vector<Row> rows;
  /// 1-based source line of each row, for diagnostics.
  std::vector<std::size_t> lines;

  /// Index of a header column, or throws ParseError naming the column.
  std::size_t column(std::string_view name) const;
};

/// Splits one line. Supports double-quoted fields with "" escapes.
Row split_line(std::string_view line);

Document parse(std::istream& in, std::string_view source_name);
Document read_file(const std::filesystem::path& path);

/// Quotes a field only if it contains a comma, quote or newline.
std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace capnet::csv

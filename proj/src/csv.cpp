#include "capnet/csv.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "capnet/error.hpp"

namespace capnet::csv {

std::size_t Document::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ParseError(fmt::format("missing column '{}' in header", name));
}

Row split_line(std::string_view line) {
  Row out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field");
  out.push_back(std::move(field));
  return out;
}

Document parse(std::istream& in, std::string_view source_name) {
  Document doc;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      doc.comments.push_back(line);
      continue;
    }
    Row row;
    try {
      row = split_line(line);
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("{}:{}: {}", source_name, lineno, e.what()));
    }
    if (!have_header) {
      doc.header = std::move(row);
      have_header = true;
      continue;
    }
    if (row.size() != doc.header.size())
      throw ParseError(fmt::format("{}:{}: expected {} fields, found {}", source_name, lineno,
                                   doc.header.size(), row.size()));
    doc.rows.push_back(std::move(row));
    doc.lines.push_back(lineno);
  }
  if (!have_header) throw ParseError(fmt::format("{}: missing header row", source_name));
  return doc;
}

Document read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return parse(in, path.string());
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << escape(row[i]);
  }
  out << '\n';
}

}  // namespace capnet::csv

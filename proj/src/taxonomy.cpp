#include "capnet/taxonomy.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>

#include <fmt/format.h>

#include "capnet/csv.hpp"
#include "capnet/error.hpp"

namespace capnet {

namespace {

constexpr int kMaxComponent = 99;

int parse_component(std::string_view part, std::size_t index, std::string_view whole) {
  if (part.empty())
    throw ParseError(fmt::format("capability id '{}': component {} is empty", whole, index + 1));
  int value = 0;
  const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
  if (ec != std::errc{} || ptr != part.data() + part.size())
    throw ParseError(
        fmt::format("capability id '{}': component {} ('{}') is not numeric", whole, index + 1, part));
  if (value < 1 || value > kMaxComponent)
    throw ParseError(fmt::format("capability id '{}': component {} ('{}') is out of range 1..{}",
                                 whole, index + 1, part, kMaxComponent));
  return value;
}

}  // namespace

CapabilityId::CapabilityId(int complex, std::optional<int> main, std::optional<int> detail)
    : complex_(complex), main_(main), detail_(detail) {
  auto check = [](int v) { return v >= 1 && v <= kMaxComponent; };
  if (!check(complex) || (main && !check(*main)) || (detail && !check(*detail)) ||
      (detail && !main))
    throw ParseError(fmt::format("invalid capability id components ({}, {}, {})", complex,
                                 main.value_or(0), detail.value_or(0)));
}

CapabilityId CapabilityId::parse(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = text.find('.', start);
    parts.push_back(text.substr(start, dot == std::string_view::npos ? dot : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  if (parts.size() > 3)
    throw ParseError(fmt::format("capability id '{}': component 4 ('{}') exceeds the three-level "
                                 "hierarchy",
                                 text, parts[3]));
  std::optional<int> main, detail;
  const int complex = parse_component(parts[0], 0, text);
  if (parts.size() > 1) main = parse_component(parts[1], 1, text);
  if (parts.size() > 2) detail = parse_component(parts[2], 2, text);
  return CapabilityId(complex, main, detail);
}

std::optional<CapabilityId> CapabilityId::parent() const {
  if (detail_) return CapabilityId(complex_, main_);
  if (main_) return CapabilityId(complex_);
  return std::nullopt;
}

CapabilityId CapabilityId::main_level() const {
  return main_ ? CapabilityId(complex_, main_) : *this;
}

std::string CapabilityId::str() const {
  std::string out = fmt::format("{}", complex_);
  if (main_) out += fmt::format(".{:02d}", *main_);
  if (detail_) out += fmt::format(".{:02d}", *detail_);
  return out;
}

std::ostream& operator<<(std::ostream& out, const CapabilityId& id) { return out << id.str(); }

Quantification::Quantification(int value) {
  if (value < kMin || value > kMax)
    throw ConfigError(fmt::format("quantification {} outside {}..{}", value, kMin, kMax));
  value_ = static_cast<std::uint8_t>(value);
}

std::string Quantification::label() const {
  static constexpr std::string_view kLabels[] = {"0", "1", "2", "3-", "3+", "4", "5"};
  return std::string(kLabels[value_]);
}

Quantification Quantification::from_label(std::string_view label) {
  if (label == "3-") return Quantification(3);
  if (label == "3+") return Quantification(4);
  if (label == "4") return Quantification(5);
  if (label == "5") return Quantification(6);
  if (label == "0" || label == "1" || label == "2") return Quantification(label[0] - '0');
  throw ParseError(fmt::format("unknown quantification label '{}'", label));
}

std::string_view to_string(CapabilityCategory c) {
  return c == CapabilityCategory::upstream ? "upstream" : "over-table";
}

std::string_view to_string(Posture p) {
  switch (p) {
    case Posture::sitting: return "sitting";
    case Posture::standing: return "standing";
    case Posture::both: return "both";
  }
  return "both";
}

std::string_view to_string(Laterality l) {
  switch (l) {
    case Laterality::unilateral: return "unilateral";
    case Laterality::bilateral: return "bilateral";
    case Laterality::not_applicable: return "n/a";
  }
  return "n/a";
}

namespace {

CapabilityCategory parse_category(std::string_view s) {
  if (s == "upstream") return CapabilityCategory::upstream;
  if (s == "over-table") return CapabilityCategory::over_table;
  throw ParseError(fmt::format("unknown category '{}'", s));
}

Posture parse_posture(std::string_view s) {
  if (s == "sitting") return Posture::sitting;
  if (s == "standing") return Posture::standing;
  if (s == "both") return Posture::both;
  throw ParseError(fmt::format("unknown posture '{}'", s));
}

Laterality parse_laterality(std::string_view s) {
  if (s == "unilateral") return Laterality::unilateral;
  if (s == "bilateral") return Laterality::bilateral;
  if (s == "n/a") return Laterality::not_applicable;
  throw ParseError(fmt::format("unknown laterality '{}'", s));
}

CapabilityCatalog from_document(const csv::Document& doc, std::string_view source) {
  for (const auto& c : doc.comments) {
    if (c.rfind("# capnet-catalog ", 0) == 0 && c != "# capnet-catalog v1")
      throw ParseError(fmt::format("{}: unsupported catalog version '{}'", source, c.substr(2)));
  }
  const auto id_col = doc.column("id");
  const auto name_col = doc.column("name");
  const auto cat_col = doc.column("category");
  const auto post_col = doc.column("posture");
  const auto lat_col = doc.column("laterality");
  std::vector<CatalogEntry> entries;
  for (std::size_t i = 0; i < doc.rows.size(); ++i) {
    const auto& row = doc.rows[i];
    try {
      entries.push_back({CapabilityId::parse(row[id_col]), row[name_col], parse_category(row[cat_col]),
                         parse_posture(row[post_col]), parse_laterality(row[lat_col])});
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("{}:{}: {}", source, doc.lines[i], e.what()));
    }
  }
  return CapabilityCatalog(std::move(entries));
}

}  // namespace

CapabilityCatalog::CapabilityCatalog(std::vector<CatalogEntry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  auto dup = std::adjacent_find(entries_.begin(), entries_.end(),
                                [](const auto& a, const auto& b) { return a.id == b.id; });
  if (dup != entries_.end())
    throw ParseError(fmt::format("duplicate capability id {} in catalog", dup->id.str()));
}

CapabilityCatalog CapabilityCatalog::load(const std::filesystem::path& path) {
  return from_document(csv::read_file(path), path.string());
}

CapabilityCatalog CapabilityCatalog::parse(std::istream& in, std::string_view source_name) {
  return from_document(csv::parse(in, source_name), source_name);
}

const CatalogEntry* CapabilityCatalog::find(const CapabilityId& id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const CatalogEntry& e, const CapabilityId& v) { return e.id < v; });
  return (it != entries_.end() && it->id == id) ? &*it : nullptr;
}

bool CapabilityCatalog::knows(const CapabilityId& id) const {
  if (contains(id)) return true;
  return std::any_of(entries_.begin(), entries_.end(), [&](const CatalogEntry& e) {
    for (auto p = e.id.parent(); p; p = p->parent())
      if (*p == id) return true;
    return false;
  });
}

std::vector<CapabilityId> sitting_over_table_set(const CapabilityCatalog& catalog) {
  std::vector<CapabilityId> out;
  for (const auto& e : catalog.entries())
    if (e.category == CapabilityCategory::over_table && e.posture != Posture::standing)
      out.push_back(e.id);
  return out;
}

}  // namespace capnet

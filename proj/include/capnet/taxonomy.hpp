#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace capnet {

/// Hierarchical capability identifier complex.main.detail, e.g. 3.04.08.
/// Lower levels may be absent ("1.01" is a main-level id, "3" a complex).
/// Orders lexicographically with an absent level sorting before any value.
class CapabilityId {
 public:
  constexpr CapabilityId() = default;
  CapabilityId(int complex, std::optional<int> main = std::nullopt,
               std::optional<int> detail = std::nullopt);

  /// Accepts 1-3 dot-separated positive integers; zero padding is optional.
  static CapabilityId parse(std::string_view text);

  int complex() const { return complex_; }
  std::optional<int> main() const { return main_; }
  std::optional<int> detail() const { return detail_; }

  bool is_detail() const { return detail_.has_value(); }
  /// The id one level up (3.04.08 -> 3.04); nullopt for a complex-level id.
  std::optional<CapabilityId> parent() const;
  /// The main-level id (complex.main); the id itself if already main-level.
  CapabilityId main_level() const;

  /// Canonical rendering: main and detail zero-padded to two digits.
  std::string str() const;

  friend auto operator<=>(const CapabilityId&, const CapabilityId&) = default;
  friend bool operator==(const CapabilityId&, const CapabilityId&) = default;

 private:
  int complex_ = 1;
  std::optional<int> main_;
  std::optional<int> detail_;
};

std::ostream& operator<<(std::ostream& out, const CapabilityId& id);

/// Score on the 7-step scale. Internal 0..6; 3 and 4 carry the labels
/// "3-" and "3+".
class Quantification {
 public:
  static constexpr int kMin = 0;
  static constexpr int kMax = 6;

  explicit Quantification(int value);

  int value() const { return value_; }
  /// Scale label: 0,1,2,3-,3+,4,5.
  std::string label() const;
  /// Inverse of label().
  static Quantification from_label(std::string_view label);

  friend auto operator<=>(const Quantification&, const Quantification&) = default;

 private:
  std::uint8_t value_;
};

enum class CapabilityCategory { upstream, over_table };
enum class Posture { sitting, standing, both };
enum class Laterality { unilateral, bilateral, not_applicable };

std::string_view to_string(CapabilityCategory c);
std::string_view to_string(Posture p);
std::string_view to_string(Laterality l);

struct CatalogEntry {
  CapabilityId id;
  std::string name;
  CapabilityCategory category = CapabilityCategory::over_table;
  Posture posture = Posture::both;
  Laterality laterality = Laterality::not_applicable;
};

/// Immutable set of known capabilities, kept in canonical id order.
class CapabilityCatalog {
 public:
  CapabilityCatalog() = default;
  /// Throws ParseError on duplicate ids.
  explicit CapabilityCatalog(std::vector<CatalogEntry> entries);

  /// Reads the line-oriented fixture (id,name,category,posture,laterality).
  static CapabilityCatalog load(const std::filesystem::path& path);
  static CapabilityCatalog parse(std::istream& in, std::string_view source_name = "<catalog>");

  const std::vector<CatalogEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const CatalogEntry* find(const CapabilityId& id) const;
  bool contains(const CapabilityId& id) const { return find(id) != nullptr; }
  /// True for catalog ids and for main/complex-level ancestors of them
  /// (main-level aggregates are valid profile keys).
  bool knows(const CapabilityId& id) const;

 private:
  std::vector<CatalogEntry> entries_;
};

/// Over-table capabilities usable in sitting posture, canonical order.
std::vector<CapabilityId> sitting_over_table_set(const CapabilityCatalog& catalog);

}  // namespace capnet

template <>
struct std::hash<capnet::CapabilityId> {
  std::size_t operator()(const capnet::CapabilityId& id) const noexcept {
    return static_cast<std::size_t>(id.complex()) * 1'000'003u +
           static_cast<std::size_t>(id.main().value_or(0)) * 1'009u +
           static_cast<std::size_t>(id.detail().value_or(0));
  }
};

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capnet/taxonomy.hpp"

namespace capnet {

enum class Phase { pre_rehab, post_rehab, unspecified };

std::string_view to_string(Phase p);
Phase parse_phase(std::string_view text);

/// Capacities of one agent. A key mapped to nullopt was listed but not
/// assessed; a missing key was never listed. Both count as "absent".
struct Profile {
  std::string agent_id;
  Phase phase = Phase::unspecified;
  std::map<CapabilityId, std::optional<Quantification>> values;

  std::optional<Quantification> get(const CapabilityId& id) const;
  void set(const CapabilityId& id, std::optional<Quantification> q) { values[id] = q; }
  /// Ids from `ids` without an assessed value, in the order given.
  std::vector<CapabilityId> missing(const std::vector<CapabilityId>& ids) const;
  bool complete_over(const std::vector<CapabilityId>& ids) const { return missing(ids).empty(); }

  friend bool operator==(const Profile&, const Profile&) = default;
};

/// Quantified demands of one action.
struct RequirementSet {
  std::string action_id;
  std::map<CapabilityId, Quantification> requirements;

  int total() const;
  std::vector<CapabilityId> ids() const;

  friend bool operator==(const RequirementSet&, const RequirementSet&) = default;
};

struct ProfileDataset {
  /// Capability columns in canonical order (the file header).
  std::vector<CapabilityId> columns;
  std::vector<Profile> profiles;
  std::string provenance;

  /// Throws ParseError if an (agent_id, phase) pair repeats.
  void validate_unique() const;
  /// Throws ParseError naming the first profile key unknown to `catalog`.
  void validate_ids(const CapabilityCatalog& catalog) const;

  friend bool operator==(const ProfileDataset&, const ProfileDataset&) = default;
};

/// Adds main-level entries, each the minimum over the assessed detail
/// entries of that main capability. Detail entries are kept; a main with no
/// assessed detail gets no entry. Only details known to `catalog` count.
Profile propagate_main_level(const Profile& profile, const CapabilityCatalog& catalog);

/// Population standard deviation of the profile over `ids`.
/// Throws MissingDataError listing unassessed ids.
double profile_std(const Profile& profile, const std::vector<CapabilityId>& ids);

/// Keeps profiles complete over `ids` whose profile_std is >= threshold,
/// preserving order.
ProfileDataset filter_profiles(const ProfileDataset& dataset, const std::vector<CapabilityId>& ids,
                               double threshold);

/// Rows with the given phase only (all rows for nullopt).
ProfileDataset select_phase(const ProfileDataset& dataset, std::optional<Phase> phase);

struct GeneratorConfig {
  /// Agents with a pre/post pair.
  std::int64_t count = 1040;
  /// Additional agents with a pre-rehabilitation profile only.
  std::int64_t extra_pre = 284;
  std::vector<CapabilityId> ids;
  double base_mean = 3.5;
  double base_sd = 1.2;
  /// Correlation between two details of the same main capability (latent).
  double within_main_correlation = 0.8;
  /// Share of each main-level latent explained by a per-agent general factor.
  double cross_main_share = 0.3;
  /// Fraction of profiles replaced by constant or hole-punched rows.
  double degenerate_fraction = 0.54;
  /// Probability that a main capability improved by one step during rehab.
  double rehab_gain = 0.4;

  /// Throws ConfigError on negative counts or probabilities outside [0,1].
  void validate() const;
};

/// Deterministic for a fixed (config, seed).
ProfileDataset generate_synthetic_profiles(const GeneratorConfig& config, std::uint64_t seed);

ProfileDataset read_dataset(std::istream& in, std::string_view source_name = "<dataset>");
ProfileDataset read_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const ProfileDataset& dataset);

/// Two-column file: capability_id,level (internal 0..6 value).
RequirementSet read_requirements(std::istream& in, std::string action_id,
                                 std::string_view source_name = "<requirements>");
RequirementSet read_requirements(const std::filesystem::path& path);
void write_requirements(std::ostream& out, const RequirementSet& requirements);

}  // namespace capnet

#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "capnet/network.hpp"
#include "capnet/profiles.hpp"

namespace capnet {

/// Requirement minus capacity per capability of B^k. Positive values are
/// deficits, negative values reserves.
struct DeltaSet {
  std::string action_id;
  std::string agent_id;
  std::map<CapabilityId, int> deltas;

  friend bool operator==(const DeltaSet&, const DeltaSet&) = default;
};

struct FuzzyParams {
  /// Per-capability slack; capabilities not listed use default_xi.
  std::map<CapabilityId, int> xi;
  int default_xi = 0;
  /// Aggregate slack on the deficit sum.
  int theta = 0;

  int xi_for(const CapabilityId& id) const;
  /// Throws ConfigError unless 0 <= xi <= 6 and 0 <= theta <= 6 * n_requirements.
  void validate(std::size_t n_requirements) const;
};

struct FuzzyClause {
  enum class Kind { per_capability, aggregate };
  Kind kind = Kind::per_capability;
  std::optional<CapabilityId> id;
  int value = 0;
  int limit = 0;

  std::string describe() const;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<FuzzyClause> violations;
};

/// Throws MissingDataError listing requirement ids without a capacity.
DeltaSet compute_delta(const RequirementSet& requirements, const Profile& profile);

int deficit_sum(const DeltaSet& deltas);

FeasibilityReport is_feasible_fuzzy(const DeltaSet& deltas, const FuzzyParams& fuzz);

enum class CompensationOutcome { feasible_direct, feasible_after_compensation, infeasible };
std::string_view to_string(CompensationOutcome o);

struct ShiftStep {
  CapabilityId deficient;
  CapabilityId reserve;
  int amount = 1;

  friend bool operator==(const ShiftStep&, const ShiftStep&) = default;
};

struct CompensationTrace {
  CompensationOutcome outcome = CompensationOutcome::feasible_direct;
  std::vector<ShiftStep> steps;
  RequirementSet initial_requirements;
  RequirementSet final_requirements;
  DeltaSet final_deltas;
  FeasibilityReport final_report;
};

/// Shifts requirement units from deficient capabilities (delta > 0) to
/// conjugated capabilities of B^k holding a reserve (delta < 0), one unit
/// at a time, until the fuzzy conditions hold. The amounts are planned as a
/// flow, so the outcome is infeasible only if no sequence of unit shifts
/// reaches feasibility. Shifts are emitted largest current deficit first,
/// ties by canonical id of the deficient and then of the reserve capability;
/// consecutive shifts on the same pair are merged into one step.
CompensationTrace compensate(const RequirementSet& requirements, const Profile& profile,
                             const ConjugationGraph& graph, const FuzzyParams& fuzz);

void write_trace_text(std::ostream& out, const CompensationTrace& trace);
nlohmann::json trace_to_json(const CompensationTrace& trace);

}  // namespace capnet

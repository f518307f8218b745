#include "capnet/deltas.hpp"

#include <algorithm>
#include <functional>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "capnet/error.hpp"

namespace capnet {

using nlohmann::json;

int FuzzyParams::xi_for(const CapabilityId& id) const {
  auto it = xi.find(id);
  return it == xi.end() ? default_xi : it->second;
}

void FuzzyParams::validate(std::size_t n_requirements) const {
  auto check = [](int v, std::string_view what) {
    if (v < 0 || v > Quantification::kMax)
      throw ConfigError(fmt::format("{} = {} outside [0, {}]", what, v, Quantification::kMax));
  };
  check(default_xi, "xi");
  for (const auto& [id, v] : xi) check(v, fmt::format("xi[{}]", id.str()));
  const auto limit = static_cast<int>(n_requirements) * Quantification::kMax;
  if (theta < 0 || theta > limit) throw ConfigError(fmt::format("theta = {} outside [0, {}]", theta, limit));
}

std::string FuzzyClause::describe() const {
  if (kind == Kind::per_capability)
    return fmt::format("per-capability slack violated on {}: delta {} > xi {}", id->str(), value, limit);
  return fmt::format("aggregate slack violated: deficit sum {} > theta {}", value, limit);
}

DeltaSet compute_delta(const RequirementSet& requirements, const Profile& profile) {
  DeltaSet out;
  out.action_id = requirements.action_id;
  out.agent_id = profile.agent_id;
  std::vector<std::string> missing;
  for (const auto& [id, r] : requirements.requirements) {
    const auto c = profile.get(id);
    if (!c) {
      missing.push_back(id.str());
      continue;
    }
    out.deltas[id] = r.value() - c->value();
  }
  if (!missing.empty())
    throw MissingDataError(fmt::format("profile '{}' lacks capacities for {}", profile.agent_id,
                                       fmt::join(missing, ", ")));
  return out;
}

int deficit_sum(const DeltaSet& deltas) {
  int sum = 0;
  for (const auto& [id, d] : deltas.deltas) sum += std::max(d, 0);
  return sum;
}

FeasibilityReport is_feasible_fuzzy(const DeltaSet& deltas, const FuzzyParams& fuzz) {
  FeasibilityReport rep;
  for (const auto& [id, d] : deltas.deltas) {
    const int limit = fuzz.xi_for(id);
    if (d > limit) rep.violations.push_back({FuzzyClause::Kind::per_capability, id, d, limit});
  }
  const int sum = deficit_sum(deltas);
  if (sum > fuzz.theta) rep.violations.push_back({FuzzyClause::Kind::aggregate, std::nullopt, sum, fuzz.theta});
  rep.feasible = rep.violations.empty();
  return rep;
}

std::string_view to_string(CompensationOutcome o) {
  switch (o) {
    case CompensationOutcome::feasible_direct: return "feasible_direct";
    case CompensationOutcome::feasible_after_compensation: return "feasible_after_compensation";
    case CompensationOutcome::infeasible: return "infeasible";
  }
  return "infeasible";
}

namespace {

/// Bipartite transport from deficient to reserve capabilities.
class ShiftPlanner {
 public:
  ShiftPlanner(const DeltaSet& deltas, const ConjugationGraph& graph) {
    for (const auto& [id, d] : deltas.deltas) {
      if (d > 0) deficient_.push_back({id, d});
      if (d < 0) reserve_.push_back({id, -d});
    }
    adjacent_.assign(deficient_.size(), std::vector<bool>(reserve_.size(), false));
    flow_.assign(deficient_.size(), std::vector<int>(reserve_.size(), 0));
    for (std::size_t i = 0; i < deficient_.size(); ++i)
      for (std::size_t j = 0; j < reserve_.size(); ++j)
        adjacent_[i][j] = graph.conjugated(deficient_[i].first, reserve_[j].first);
    out_.assign(deficient_.size(), 0);
    in_.assign(reserve_.size(), 0);
  }

  /// Augments while some deficient capability is below its cap and the
  /// total is below `target`. Returns the total moved.
  int augment(const std::vector<int>& cap, int target) {
    while (total_ < target) {
      bool progressed = false;
      for (std::size_t i = 0; i < deficient_.size() && total_ < target; ++i) {
        if (out_[i] >= cap[i]) continue;
        std::vector<bool> seen_d(deficient_.size(), false), seen_r(reserve_.size(), false);
        if (push_from(i, seen_d, seen_r)) {
          ++out_[i];
          ++total_;
          progressed = true;
        }
      }
      if (!progressed) break;
    }
    return total_;
  }

  std::size_t n_deficient() const { return deficient_.size(); }
  int deficit(std::size_t i) const { return deficient_[i].second; }
  int moved_from(std::size_t i) const { return out_[i]; }
  const std::vector<std::pair<CapabilityId, int>>& deficient() const { return deficient_; }
  const std::vector<std::pair<CapabilityId, int>>& reserve() const { return reserve_; }
  const std::vector<std::vector<int>>& flow() const { return flow_; }

 private:
  /// Finds an augmenting path starting at deficient i and applies one unit.
  bool push_from(std::size_t i, std::vector<bool>& seen_d, std::vector<bool>& seen_r) {
    seen_d[i] = true;
    for (std::size_t j = 0; j < reserve_.size(); ++j) {
      if (!adjacent_[i][j] || seen_r[j]) continue;
      seen_r[j] = true;
      if (in_[j] < reserve_[j].second) {
        ++flow_[i][j];
        ++in_[j];
        return true;
      }
      // reroute a unit that already reaches j from another deficient k
      for (std::size_t k = 0; k < deficient_.size(); ++k) {
        if (seen_d[k] || flow_[k][j] == 0) continue;
        if (push_from(k, seen_d, seen_r)) {
          --flow_[k][j];
          ++flow_[i][j];
          return true;
        }
      }
    }
    return false;
  }

  std::vector<std::pair<CapabilityId, int>> deficient_, reserve_;
  std::vector<std::vector<bool>> adjacent_;
  std::vector<std::vector<int>> flow_;
  std::vector<int> out_, in_;
  int total_ = 0;
};

RequirementSet apply_step(RequirementSet r, const CapabilityId& from, const CapabilityId& to) {
  r.requirements.at(from) = Quantification(r.requirements.at(from).value() - 1);
  r.requirements.at(to) = Quantification(r.requirements.at(to).value() + 1);
  return r;
}

}  // namespace

CompensationTrace compensate(const RequirementSet& requirements, const Profile& profile,
                             const ConjugationGraph& graph, const FuzzyParams& fuzz) {
  if (const auto c = graph.find_cycle()) throw CycleError("compensation graph has a cycle");
  CompensationTrace trace;
  trace.initial_requirements = requirements;
  trace.final_requirements = requirements;
  auto deltas = compute_delta(requirements, profile);
  trace.final_deltas = deltas;
  trace.final_report = is_feasible_fuzzy(deltas, fuzz);
  if (trace.final_report.feasible) {
    trace.outcome = CompensationOutcome::feasible_direct;
    return trace;
  }

  ShiftPlanner planner(deltas, graph);
  const auto n = planner.n_deficient();
  std::vector<int> lower(n), full(n);
  int lower_sum = 0, deficit_total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    lower[i] = std::max(0, planner.deficit(i) - fuzz.xi_for(planner.deficient()[i].first));
    full[i] = planner.deficit(i);
    lower_sum += lower[i];
    deficit_total += full[i];
  }
  const int need = std::max(lower_sum, deficit_total - fuzz.theta);
  planner.augment(lower, lower_sum);
  bool planned = true;
  for (std::size_t i = 0; i < n; ++i) planned = planned && planner.moved_from(i) >= lower[i];
  // infeasible plans still exhaust every admissible shift
  planner.augment(full, planned ? need : deficit_total);

  auto remaining = planner.flow();
  const auto& dnodes = planner.deficient();
  const auto& rnodes = planner.reserve();
  while (!is_feasible_fuzzy(deltas, fuzz).feasible) {
    std::optional<std::pair<std::size_t, std::size_t>> pick;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < rnodes.size(); ++j) {
        if (remaining[i][j] == 0) continue;
        if (!pick || deltas.deltas[dnodes[i].first] > deltas.deltas[dnodes[pick->first].first]) pick = {i, j};
        break;
      }
    }
    if (!pick) break;
    const auto& [i, j] = *pick;
    const auto& d = dnodes[i].first;
    const auto& e = rnodes[j].first;
    --remaining[i][j];
    trace.final_requirements = apply_step(trace.final_requirements, d, e);
    --deltas.deltas[d];
    ++deltas.deltas[e];
    if (!trace.steps.empty() && trace.steps.back().deficient == d && trace.steps.back().reserve == e)
      ++trace.steps.back().amount;
    else
      trace.steps.push_back({d, e, 1});
  }

  trace.final_deltas = deltas;
  trace.final_report = is_feasible_fuzzy(deltas, fuzz);
  trace.outcome = trace.final_report.feasible ? CompensationOutcome::feasible_after_compensation
                                              : CompensationOutcome::infeasible;
  if (trace.final_requirements.total() != requirements.total())
    throw InvariantError("compensation changed the requirement sum");
  return trace;
}

void write_trace_text(std::ostream& out, const CompensationTrace& trace) {
  out << "outcome: " << to_string(trace.outcome) << '\n';
  for (const auto& s : trace.steps)
    out << fmt::format("shift {} -> {} amount {}\n", s.deficient.str(), s.reserve.str(), s.amount);
  for (const auto& v : trace.final_report.violations) out << "unmet: " << v.describe() << '\n';
}

json trace_to_json(const CompensationTrace& trace) {
  auto req_json = [](const RequirementSet& r) {
    json j = json::object();
    for (const auto& [id, q] : r.requirements) j[id.str()] = q.value();
    return j;
  };
  json doc;
  doc["outcome"] = to_string(trace.outcome);
  doc["action_id"] = trace.initial_requirements.action_id;
  doc["agent_id"] = trace.final_deltas.agent_id;
  doc["steps"] = json::array();
  for (const auto& s : trace.steps)
    doc["steps"].push_back({{"deficient", s.deficient.str()}, {"reserve", s.reserve.str()}, {"amount", s.amount}});
  doc["initial_requirements"] = req_json(trace.initial_requirements);
  doc["final_requirements"] = req_json(trace.final_requirements);
  json deltas = json::object();
  for (const auto& [id, d] : trace.final_deltas.deltas) deltas[id.str()] = d;
  doc["final_deltas"] = deltas;
  doc["violations"] = json::array();
  for (const auto& v : trace.final_report.violations) doc["violations"].push_back(v.describe());
  return doc;
}

}  // namespace capnet

#include <doctest.h>

#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "capnet/deltas.hpp"
#include "capnet/error.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace capnet;
using fixtures::id;

namespace {

RequirementSet req(std::initializer_list<std::pair<const char*, int>> v) {
  RequirementSet r;
  r.action_id = "act";
  for (const auto& [k, q] : v) r.requirements.insert_or_assign(id(k), Quantification(q));
  return r;
}

Profile prof(std::initializer_list<std::pair<const char*, int>> v) {
  Profile p;
  p.agent_id = "ag";
  for (const auto& [k, q] : v) p.values[id(k)] = Quantification(q);
  return p;
}

DeltaSet deltas(std::initializer_list<std::pair<const char*, int>> v) {
  DeltaSet d;
  for (const auto& [k, x] : v) d.deltas[id(k)] = x;
  return d;
}

ConjugationGraph graph(std::initializer_list<std::pair<const char*, const char*>> edges,
                       std::initializer_list<const char*> extra = {}) {
  ConjugationGraph g;
  std::set<CapabilityId> nodes;
  for (const auto& [a, b] : edges) nodes.insert(id(a)), nodes.insert(id(b));
  for (const auto* n : extra) nodes.insert(id(n));
  for (const auto& n : nodes) g.add_node({n, n.str(), CapabilityCategory::over_table});
  for (const auto& [a, b] : edges) g.add_edge({id(a), id(b), {Relation::replaced_by, false}, std::nullopt});
  return g;
}

}  // namespace

TEST_CASE("compute_delta") {
  CHECK(compute_delta(req({{"3.03.04", 4}}), prof({{"3.03.04", 4}})).deltas == deltas({{"3.03.04", 0}}).deltas);
  const auto d = compute_delta(req({{"3.03.04", 5}, {"3.02.03", 2}}), prof({{"3.03.04", 3}, {"3.02.03", 5}}));
  CHECK(d.deltas.at(id("3.03.04")) == 2);
  CHECK(d.deltas.at(id("3.02.03")) == -3);
  CHECK(d.action_id == "act");
  CHECK(d.agent_id == "ag");

  try {
    compute_delta(req({{"3.03.04", 5}, {"3.02.03", 2}}), prof({{"3.02.03", 5}}));
    FAIL("expected MissingDataError");
  } catch (const MissingDataError& e) {
    CHECK(std::string(e.what()).find("3.03.04") != std::string::npos);
  }

  SUBCASE("elementwise oracle and antisymmetry") {
    std::mt19937 rng(21);
    std::uniform_int_distribution<int> q(0, 6);
    for (int t = 0; t < 200; ++t) {
      RequirementSet r;
      Profile p;
      RequirementSet r_swapped;
      Profile p_swapped;
      for (int j = 1; j <= 10; ++j) {
        const CapabilityId c(3, 3, j);
        const int a = q(rng), b = q(rng);
        r.requirements.insert_or_assign(c, Quantification(a));
        p.values[c] = Quantification(b);
        r_swapped.requirements.insert_or_assign(c, Quantification(b));
        p_swapped.values[c] = Quantification(a);
      }
      const auto d = compute_delta(r, p);
      const auto s = compute_delta(r_swapped, p_swapped);
      for (const auto& [c, v] : d.deltas) {
        CHECK(v == r.requirements.at(c).value() - p.values.at(c)->value());
        CHECK(s.deltas.at(c) == -v);
      }
    }
  }
}

TEST_CASE("deficit_sum") {
  CHECK(deficit_sum(deltas({{"3.03.04", 0}, {"3.02.03", 0}})) == 0);
  CHECK(deficit_sum(deltas({{"3.03.04", 2}, {"3.02.03", -3}})) == 2);
  CHECK(deficit_sum(deltas({{"3.03.04", 1}, {"3.02.03", 1}, {"3.04.02", -5}})) == 2);
}

TEST_CASE("fuzzy feasibility") {
  FuzzyParams f;
  f.xi = {{id("3.03.04"), 1}, {id("3.02.03"), 0}, {id("3.04.02"), 0}};
  f.theta = 1;
  CHECK(is_feasible_fuzzy(deltas({{"3.03.04", 1}, {"3.02.03", 0}, {"3.04.02", -2}}), f).feasible);

  const auto per = is_feasible_fuzzy(deltas({{"3.03.04", 2}, {"3.02.03", 0}}), f);
  CHECK_FALSE(per.feasible);
  REQUIRE(per.violations.size() == 2);
  CHECK(per.violations[0].kind == FuzzyClause::Kind::per_capability);
  CHECK(per.violations[0].id == id("3.03.04"));

  FuzzyParams ones;
  ones.default_xi = 1;
  ones.theta = 1;
  const auto agg = is_feasible_fuzzy(deltas({{"3.03.04", 1}, {"3.02.03", 1}}), ones);
  CHECK_FALSE(agg.feasible);
  REQUIRE(agg.violations.size() == 1);
  CHECK(agg.violations[0].kind == FuzzyClause::Kind::aggregate);
  CHECK(agg.violations[0].value == 2);

  FuzzyParams bad;
  bad.default_xi = 7;
  CHECK_THROWS_AS(bad.validate(2), ConfigError);
  bad.default_xi = 0;
  bad.theta = 13;
  CHECK_THROWS_AS(bad.validate(2), ConfigError);
  bad.theta = 12;
  CHECK_NOTHROW(bad.validate(2));
}

TEST_CASE("compensation") {
  FuzzyParams strict;
  SUBCASE("reach forward compensated by trunk bending") {
    const auto g = fixtures::reference_graph();
    REQUIRE(g.conjugated(id("3.03.04"), id("3.02.03")));
    const auto r = req({{"3.03.04", 5}, {"3.02.03", 2}});
    const auto p = prof({{"3.03.04", 4}, {"3.02.03", 3}});
    const auto t = compensate(r, p, g, strict);
    CHECK(t.outcome == CompensationOutcome::feasible_after_compensation);
    REQUIRE(t.steps.size() == 1);
    CHECK(t.steps[0] == ShiftStep{id("3.03.04"), id("3.02.03"), 1});
    CHECK(t.final_requirements.requirements.at(id("3.03.04")).value() == 4);
    CHECK(t.final_requirements.requirements.at(id("3.02.03")).value() == 3);
    CHECK(oracle::shift_search(r, p, g, strict, 1));
    CHECK(t.final_requirements.total() == r.total());
  }
  SUBCASE("no deficit") {
    const auto t = compensate(req({{"3.03.04", 3}}), prof({{"3.03.04", 4}}), graph({}, {"3.03.04"}), strict);
    CHECK(t.outcome == CompensationOutcome::feasible_direct);
    CHECK(t.steps.empty());
  }
  SUBCASE("empty requirement set") {
    const auto t = compensate(RequirementSet{}, Profile{}, ConjugationGraph{}, strict);
    CHECK(t.outcome == CompensationOutcome::feasible_direct);
  }
  SUBCASE("deficit without a conjugated reserve") {
    const auto g = graph({{"3.03.04", "3.04.02"}}, {"5.01.01"});
    const auto t = compensate(req({{"3.03.04", 5}, {"3.04.02", 4}, {"5.01.01", 1}}),
                              prof({{"3.03.04", 3}, {"3.04.02", 4}, {"5.01.01", 5}}), g, strict);
    CHECK(t.outcome == CompensationOutcome::infeasible);
    CHECK_FALSE(t.final_report.feasible);
  }
  SUBCASE("greedy order would strand a deficit") {
    // d1 (3.03.04) deficit 2, d2 (3.03.06) deficit 1; e1 (3.02.03) serves both, e2 (1.05.01) only d1
    const auto g = graph({{"3.02.03", "3.03.04"}, {"3.02.03", "3.03.06"}, {"1.05.01", "3.03.04"}});
    FuzzyParams f;
    f.xi = {{id("3.03.04"), 1}};
    f.theta = 1;
    const auto r = req({{"3.03.04", 5}, {"3.03.06", 4}, {"3.02.03", 2}, {"1.05.01", 2}});
    const auto p = prof({{"3.03.04", 3}, {"3.03.06", 3}, {"3.02.03", 3}, {"1.05.01", 3}});
    const auto t = compensate(r, p, g, f);
    CHECK(oracle::shift_search(r, p, g, f, 3));
    CHECK(t.outcome == CompensationOutcome::feasible_after_compensation);
    CHECK(t.final_report.feasible);
  }
  SUBCASE("tie-break order") {
    const auto g = graph({{"3.02.03", "3.03.04"}, {"3.02.03", "3.03.06"}});
    const auto r = req({{"3.03.04", 4}, {"3.03.06", 4}, {"3.02.03", 1}});
    const auto p = prof({{"3.03.04", 3}, {"3.03.06", 3}, {"3.02.03", 3}});
    const auto t = compensate(r, p, g, strict);
    REQUIRE(t.steps.size() == 2);
    CHECK(t.steps[0].deficient == id("3.03.04"));
    CHECK(t.steps[1].deficient == id("3.03.06"));
  }
  SUBCASE("trace serialization") {
    const auto t = compensate(req({{"3.03.04", 5}, {"3.02.03", 2}}), prof({{"3.03.04", 4}, {"3.02.03", 3}}),
                              fixtures::reference_graph(), strict);
    std::ostringstream s;
    write_trace_text(s, t);
    CHECK(s.str().find("shift 3.03.04 -> 3.02.03 amount 1") != std::string::npos);
    const auto j = trace_to_json(t);
    CHECK(j["outcome"] == "feasible_after_compensation");
    CHECK(j["steps"].size() == 1);
    CHECK(j["final_requirements"]["3.02.03"] == 3);
  }
}

#include <doctest.h>

#include <random>
#include <sstream>

#include "capnet/error.hpp"
#include "capnet/lp.hpp"
#include "capnet/parallel.hpp"
#include "capnet/synthesis.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace capnet;
using fixtures::id;

namespace {

ConjugationGraph chain(std::initializer_list<const char*> ids) {
  ConjugationGraph g;
  for (const auto* s : ids) g.add_node({id(s), s, CapabilityCategory::over_table});
  const std::vector<const char*> v(ids);
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    g.add_edge({id(v[i]), id(v[i + 1]), {Relation::condition_for, false}, std::nullopt});
  return g;
}

MovementSequence seq(std::initializer_list<const char*> ids) {
  MovementSequence s;
  s.sequence_id = 1;
  for (const auto* x : ids) s.steps.push_back({id(x), 1});
  return s;
}

bool follows_edges(const ConjugationGraph& g, const Path& p) {
  std::set<CapabilityId> seen(p.begin(), p.end());
  if (seen.size() != p.size()) return false;
  for (std::size_t i = 0; i + 1 < p.size(); ++i)
    if (!g.find_edge(p[i], p[i + 1])) return false;
  return true;
}

}  // namespace

TEST_CASE("linear relaxation") {
  // min x0 + x1 s.t. 1 <= x0 + x1 <= 2, 0.5 <= x0 <= 1
  lp::Problem p;
  p.rows = 1;
  p.cols = 2;
  p.a = {1, 1};
  p.row_lo = {1};
  p.row_hi = {2};
  p.col_lo = {0.5, 0};
  p.col_hi = {1, 1};
  p.cost = {1, 1};
  const auto r = lp::solve(p);
  REQUIRE(r.status == lp::Status::optimal);
  CHECK(r.objective == doctest::Approx(1.0));

  p.row_lo = {3};
  p.row_hi = {4};
  const auto inf = lp::solve(p);
  CHECK(inf.status == lp::Status::infeasible);
  CHECK(inf.row_violation[0] > 0.5);
}

TEST_CASE("enumerate paths") {
  const auto g4 = chain({"3.03.02", "3.03.04", "3.03.06", "3.03.08"});
  const auto p = enumerate_paths(g4, 4);
  REQUIRE(p.size() == 1);
  CHECK(p.paths[0] == Path{id("3.03.02"), id("3.03.04"), id("3.03.06"), id("3.03.08")});
  CHECK(enumerate_paths(chain({"3.03.02", "3.03.04", "3.03.06"}), 4).size() == 0);
  CHECK(enumerate_paths(g4, 1).size() == 10);
  CHECK_THROWS_AS(enumerate_paths(g4, 0), ConfigError);

  SUBCASE("reference graph") {
    const auto g = fixtures::reference_graph();
    const auto paths = enumerate_paths(g, 4);
    CHECK(paths.size() == 403);
    CHECK(enumerate_paths_serial(g, 4) == paths);
    for (int t : {1, 3}) {
      parallel::set_threads(t);
      CHECK(enumerate_paths(g, 4) == paths);
    }
    parallel::set_threads(0);
    CHECK(std::is_sorted(paths.paths.begin(), paths.paths.end()));
    for (const auto& path : paths.paths) {
      CHECK(path.size() >= 4);
      CHECK(follows_edges(g, path));
    }
    auto visits_in_order = [&](const Path& want) {
      return std::any_of(paths.paths.begin(), paths.paths.end(), [&](const Path& path) {
        auto it = path.begin();
        for (const auto& w : want) {
          it = std::find(it, path.end(), w);
          if (it == path.end()) return false;
        }
        return true;
      });
    };
    // Overhead sequence: both ends exist, but the 'a' link 1.06.02 -> 3.03.10
    // is dropped since 3.03.10 -> 3.04.06 -> 1.06.02 is in the c/d skeleton.
    CHECK(visits_in_order({id("3.03.02"), id("1.06.02")}));
    CHECK(visits_in_order({id("3.03.10"), id("3.04.10")}));
    CHECK(g.find_edge(id("3.03.10"), id("3.04.06")));
    CHECK(g.find_edge(id("3.04.06"), id("1.06.02")));
    CHECK_FALSE(g.find_edge(id("1.06.02"), id("3.03.10")));
    CHECK_FALSE(visits_in_order({id("3.03.02"), id("1.06.02"), id("3.03.10"), id("3.04.10")}));
    CHECK(g.successors(id("1.06.02")).empty());
  }
}

TEST_CASE("cover solver") {
  SUBCASE("lexicographic rule") {
    CoverProblem p;
    p.node_set = {id("3.03.04"), id("3.04.02")};
    for (int i = 0; i < 7; ++i) p.paths.paths.push_back({id("3.03.04"), id("3.04.02")});
    p.p_max = 6;
    p.p_hat_max = 7;
    const auto s = solve_cover(p);
    CHECK(s.selected == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  }
  SUBCASE("under-covered node is named") {
    CoverProblem p;
    p.node_set = {id("3.03.04"), id("5.01.01")};
    for (int i = 0; i < 8; ++i)
      p.paths.paths.push_back(i < 5 ? Path{id("3.03.04"), id("5.01.01")} : Path{id("3.03.04")});
    p.p_max = 6;
    p.p_hat_max = 8;
    try {
      solve_cover(p);
      FAIL("expected infeasibility");
    } catch (const CoverInfeasibleError& e) {
      CHECK(e.binding() == std::vector<CapabilityId>{id("5.01.01")});
      CHECK(std::string(e.what()).find("5.01.01") != std::string::npos);
    }
  }
  SUBCASE("upper bound conflict") {
    CoverProblem p;
    p.node_set = {id("3.03.04"), id("5.01.01")};
    for (int i = 0; i < 3; ++i) p.paths.paths.push_back({id("3.03.04"), id("5.01.01")});
    for (int i = 0; i < 3; ++i) p.paths.paths.push_back({id("5.01.01")});
    p.p_max = 2;
    p.p_hat_max = 2;
    CHECK_NOTHROW(solve_cover(p));
    p.paths.paths.resize(3);
    p.paths.paths.push_back({id("3.03.04")});
    p.p_max = 3;
    p.p_hat_max = 3;
    CHECK(solve_cover(p).objective == 3);
  }
  SUBCASE("invalid bounds") {
    CoverProblem p;
    p.p_max = 3;
    p.p_hat_max = 2;
    CHECK_THROWS_AS(solve_cover(p), ConfigError);
  }
  SUBCASE("matches exhaustive enumeration") {
    std::mt19937 rng(2024);
    int feasible = 0;
    for (int t = 0; t < 150; ++t) {
      std::uniform_int_distribution<int> np(1, 12), nn(1, 5), pm(1, 3), slack(0, 2);
      CoverProblem p;
      const int nodes = nn(rng);
      for (int j = 1; j <= nodes; ++j) p.node_set.push_back(CapabilityId(3, 3, j));
      const int paths = np(rng);
      for (int w = 0; w < paths; ++w) {
        Path path;
        for (int j = 0; j < nodes; ++j)
          if (rng() % 2) path.push_back(p.node_set[static_cast<std::size_t>(j)]);
        if (path.empty()) path.push_back(p.node_set[0]);
        p.paths.paths.push_back(path);
      }
      p.p_max = pm(rng);
      p.p_hat_max = p.p_max + slack(rng);
      const auto want = oracle::brute_force_cover(p);
      if (!want.feasible) {
        CHECK_THROWS_AS(solve_cover(p), CoverInfeasibleError);
        continue;
      }
      ++feasible;
      const auto got = solve_cover(p);
      CHECK(got.objective == want.objective);
      CHECK(got.selected == want.lexmin);
    }
    CHECK(feasible > 30);
  }
}

TEST_CASE("reference synthesis") {
  const auto g = fixtures::reference_graph();
  CoverProblem p;
  p.paths = enumerate_paths(g, 4);
  p.node_set = synthesis_nodes(g);
  p.p_max = 6;
  p.p_hat_max = 7;
  const auto s = solve_cover(p);
  CHECK(s.objective == 32);
  CHECK(s.lp_bound == doctest::Approx(32.0));
  for (auto c : visit_counts(p, s.selected)) {
    CHECK(c >= 6);
    CHECK(c <= 7);
  }
  p.p_hat_max = 6;
  CHECK_THROWS_AS(solve_cover(p), CoverInfeasibleError);

  SUBCASE("without the repair edge 3.01.03 is unreachable") {
    const auto plain = fixtures::reference_graph(false);
    CoverProblem q;
    q.paths = enumerate_paths(plain, 4);
    q.node_set = synthesis_nodes(plain);
    try {
      solve_cover(q);
      FAIL("expected infeasibility");
    } catch (const CoverInfeasibleError& e) {
      CHECK(std::find(e.binding().begin(), e.binding().end(), id("3.01.03")) != e.binding().end());
    }
  }
}

TEST_CASE("annotate requirements") {
  SUBCASE("even spread") {
    std::vector<Path> paths(6, Path{id("3.03.04"), id("3.04.10")});
    const auto seqs = annotate_requirements(paths, 7);
    for (int i = 0; i < 6; ++i) CHECK(seqs[static_cast<std::size_t>(i)].steps[0].level == i + 1);
    CHECK(annotate_requirements({Path{id("3.03.04")}}, 7)[0].steps[0].level == 1);
    std::vector<Path> seven(7, Path{id("3.03.04")});
    std::vector<int> levels;
    for (const auto& s : annotate_requirements(seven, 7)) levels.push_back(s.steps[0].level);
    CHECK(levels.front() == 1);
    CHECK(levels.back() == 6);
    CHECK(std::is_sorted(levels.begin(), levels.end()));
    CHECK_THROWS_AS(annotate_requirements(seven, 6), InvariantError);
  }
  SUBCASE("lifting with grips") {
    std::vector<Path> paths{{id("3.04.08"), id("5.01.04")}, {id("3.04.02"), id("5.01.04")},
                            {id("3.04.08"), id("5.01.04")}, {id("3.04.02"), id("5.01.03")},
                            {id("3.04.02"), id("5.01.04")}, {id("3.04.08"), id("5.01.04")}};
    const auto seqs = annotate_requirements(paths, 7);
    for (const auto& s : seqs) {
      const bool pinch = s.steps[0].id == id("3.04.08");
      CHECK((pinch ? s.steps[1].level <= 3 : s.steps[1].level >= 4));
    }
    CHECK(seqs[0].steps[1].level == 1);
    CHECK(seqs[5].steps[1].level == 3);
    CHECK(seqs[1].steps[1].level == 4);
    CHECK(seqs[4].steps[1].level == 6);
    CHECK(seqs[3].steps[1].level == 4);
  }
}

TEST_CASE("names") {
  CHECK(name_sequence(seq({"3.01.01", "3.03.08", "3.04.02", "5.01.04"})) == "pull out, from behind");
  CHECK(name_sequence(seq({"3.03.02", "1.06.02"})) == "reach & push, overhead");
  CHECK(name_sequence(MovementSequence{}) == "unnamed");
  CHECK(name_sequence(seq({"3.03.06", "3.04.08", "5.01.01"})) == "pick & place, sideways");
  CHECK(name_sequence(seq({"3.02.03", "3.03.04", "3.04.10"})) == "reach & push, frontal");
  CHECK(name_sequence(seq({"3.04.06", "3.04.08", "5.01.03"})) == "pick & place, in place");
}

TEST_CASE("lint") {
  CHECK(lint_sequences({seq({"3.01.01", "3.03.08", "3.04.02", "5.01.03"})}).size() == 1);
  CHECK(lint_sequences({seq({"3.03.08", "3.04.02", "5.01.01", "5.01.04"})}).empty());
  CHECK(lint_sequences({}).empty());
  const auto w = lint_sequences({seq({"3.03.08", "5.01.04"})});
  REQUIRE(w.size() == 1);
  CHECK(w[0].message.find("5.01.01") != std::string::npos);
}

TEST_CASE("sequence table round trip") {
  std::vector<Path> paths{{id("3.03.02"), id("1.06.02"), id("3.03.10"), id("3.04.10")},
                          {id("3.03.04"), id("3.04.10")}};
  const auto seqs = annotate_requirements(paths, 7);
  std::stringstream s;
  write_sequences_csv(s, seqs);
  CHECK(s.str().find("3.03.02:1 1.06.02:1 3.03.10:1 3.04.10:1") != std::string::npos);
  CHECK(read_sequences_csv(s) == seqs);
  std::ostringstream text;
  write_sequences_text(text, seqs);
  CHECK(text.str().find("reach & push, overhead") != std::string::npos);
}

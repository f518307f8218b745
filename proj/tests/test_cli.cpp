#include <doctest.h>

#include <fstream>
#include <sstream>

#include <unistd.h>

#include "capnet/cli.hpp"
#include "capnet/profiles.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = capnet::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("capnet_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string tmp(const char* name) { return (scratch() / name).string(); }

std::string example(const char* name) { return (capnet::cli::default_data_dir() / "examples" / name).string(); }

}  // namespace

TEST_CASE("usage errors") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"no-such-command"}).code == 2);
  CHECK(cli({"synthesize", "--p-max", "zero"}).code == 2);
  CHECK(cli({"gen-data", "--count", "-1", "--out", tmp("neg.csv")}).code == 2);
  CHECK(cli({"analyze"}).code == 2);
}

TEST_CASE("build-graph report") {
  const auto r = cli({"build-graph"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("nodes: 22") != std::string::npos);
  CHECK(r.out.find("4 edges pruned, 3 edges added") != std::string::npos);
  CHECK(r.out.find("edges: 79") != std::string::npos);
  const auto plain = cli({"build-graph", "--no-repair"});
  CHECK(plain.out.find("4 edges pruned, 2 edges added") != std::string::npos);

  const auto missing = cli({"build-graph", "--catalog", tmp("absent.csv")});
  CHECK(missing.code == 3);
  CHECK(missing.err.find("absent.csv") != std::string::npos);
  CHECK(cli({"build-graph", "--prune-threshold", "-0.5"}).code == 2);
}

TEST_CASE("graph artifacts are reproducible") {
  REQUIRE(cli({"build-graph", "--out-json", tmp("g1.json"), "--out-dot", tmp("g1.dot")}).code == 0);
  REQUIRE(cli({"--threads", "1", "build-graph", "--out-json", tmp("g2.json"), "--out-dot", tmp("g2.dot")}).code == 0);
  CHECK(slurp(tmp("g1.json")) == slurp(tmp("g2.json")));
  CHECK(slurp(tmp("g1.dot")) == slurp(tmp("g2.dot")));
  CHECK(slurp(tmp("g1.dot")).rfind("digraph", 0) == 0);

  REQUIRE(cli({"synthesize", "--graph", tmp("g1.json"), "--out", tmp("s1.csv")}).code == 0);
  REQUIRE(cli({"--threads", "1", "synthesize", "--out", tmp("s2.csv"), "--out-text", tmp("s2.txt")}).code == 0);
  CHECK(slurp(tmp("s1.csv")) == slurp(tmp("s2.csv")));
  CHECK(!slurp(tmp("s2.txt")).empty());
}

TEST_CASE("synthesize infeasible") {
  const auto r = cli({"synthesize", "--p-max", "7", "--p-hat-max", "7"});
  CHECK(r.code == 4);
  CHECK(!r.err.empty());
  CHECK(cli({"synthesize", "--p-max", "8", "--p-hat-max", "7"}).code == 2);
}

TEST_CASE("gen-data") {
  auto r = cli({"gen-data", "--count", "0", "--extra-pre", "0", "--out", tmp("empty.csv")});
  REQUIRE(r.code == 0);
  const auto empty = capnet::read_dataset(fs::path(tmp("empty.csv")));
  CHECK(empty.profiles.empty());
  CHECK(empty.columns.size() == 33);

  REQUIRE(cli({"gen-data", "--count", "50", "--seed", "9", "--out", tmp("d1.csv")}).code == 0);
  REQUIRE(cli({"--threads", "1", "gen-data", "--count", "50", "--seed", "9", "--out", tmp("d2.csv")}).code == 0);
  REQUIRE(cli({"gen-data", "--count", "50", "--seed", "10", "--out", tmp("d3.csv")}).code == 0);
  CHECK(slurp(tmp("d1.csv")) == slurp(tmp("d2.csv")));
  CHECK(slurp(tmp("d1.csv")) != slurp(tmp("d3.csv")));
  CHECK(cli({"gen-data", "--degenerate", "1.5", "--out", tmp("bad.csv")}).code == 2);
}

TEST_CASE("analyze") {
  REQUIRE(cli({"gen-data", "--count", "120", "--extra-pre", "10", "--seed", "3", "--out", tmp("a.csv")}).code == 0);
  const auto r = cli({"analyze", "--dataset", tmp("a.csv"), "--resamples", "99", "--out-corr", tmp("c1.csv"),
                      "--out-p", tmp("p1.csv")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("retained") != std::string::npos);
  REQUIRE(cli({"--threads", "1", "analyze", "--dataset", tmp("a.csv"), "--resamples", "99", "--out-corr",
               tmp("c2.csv"), "--out-p", tmp("p2.csv")})
              .code == 0);
  CHECK(slurp(tmp("c1.csv")) == slurp(tmp("c2.csv")));
  CHECK(slurp(tmp("p1.csv")) == slurp(tmp("p2.csv")));

  const auto all = cli({"analyze", "--dataset", tmp("a.csv"), "--threshold", "0", "--resamples", "9"});
  CHECK(all.code == 0);
  CHECK(cli({"analyze", "--dataset", tmp("a.csv"), "--threshold", "-1"}).code == 2);

  {
    std::ofstream f(tmp("flat.csv"));
    f << "agent_id,phase,3.03.04,3.02.03\n";
    for (int i = 0; i < 5; ++i) f << "A" << i << ",post_rehab,3,3\n";
  }
  const auto flat = cli({"analyze", "--dataset", tmp("flat.csv"), "--resamples", "9"});
  CHECK(flat.code == 3);
  CHECK(!flat.err.empty());
  CHECK(cli({"analyze", "--dataset", tmp("nothing.csv")}).code == 3);
}

TEST_CASE("allocate") {
  const auto r = cli({"allocate", "--requirements", example("reach_forward_requirements.csv"), "--profile",
                      example("reach_forward_profile.csv"), "--out-json", tmp("trace.json")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("outcome: feasible_after_compensation") != std::string::npos);
  CHECK(r.out.find("shift 3.03.04 -> 3.02.03 amount 1") != std::string::npos);
  CHECK(slurp(tmp("trace.json")).find("\"outcome\": \"feasible_after_compensation\"") != std::string::npos);

  const auto fuzzy = cli({"allocate", "--requirements", example("reach_forward_requirements.csv"), "--profile",
                          example("reach_forward_profile.csv"), "--xi", "1", "--theta", "1"});
  CHECK(fuzzy.code == 0);
  CHECK(fuzzy.out.find("outcome: feasible_direct") != std::string::npos);

  {
    std::ofstream f(tmp("none.csv"));
    f << "# action: idle\ncapability_id,level\n";
  }
  const auto none = cli({"allocate", "--requirements", tmp("none.csv"), "--profile", example("reach_forward_profile.csv")});
  CHECK(none.code == 0);
  CHECK(none.out.find("feasible_direct") != std::string::npos);

  {
    std::ofstream f(tmp("hard.csv"));
    f << "# action: heavy\ncapability_id,level\n3.03.04,6\n3.02.03,6\n";
  }
  const auto hard = cli({"allocate", "--requirements", tmp("hard.csv"), "--profile", example("reach_forward_profile.csv")});
  CHECK(hard.code == 4);
  CHECK(hard.out.find("unmet:") != std::string::npos);
  CHECK(cli({"allocate", "--requirements", tmp("none.csv"), "--profile", example("reach_forward_profile.csv"),
             "--agent", "nobody"})
            .code == 3);
  CHECK(cli({"allocate", "--requirements", tmp("none.csv"), "--profile", example("reach_forward_profile.csv"),
             "--xi-for", "3.03.04"})
            .code == 2);
}

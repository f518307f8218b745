#include <doctest.h>

#include <random>
#include <sstream>

#include "capnet/error.hpp"
#include "capnet/taxonomy.hpp"
#include "fixtures.hpp"

using namespace capnet;
using fixtures::id;

TEST_CASE("parse capability ids") {
  const auto a = CapabilityId::parse("3.04.08");
  CHECK(a.complex() == 3);
  CHECK(a.main() == 4);
  CHECK(a.detail() == 8);

  const auto b = CapabilityId::parse("1.01");
  CHECK(b.main() == 1);
  CHECK_FALSE(b.detail().has_value());
  CHECK(b.str() == "1.01");

  CHECK(CapabilityId::parse("3.4.8").str() == "3.04.08");
  CHECK(CapabilityId::parse("4.01").str() == "4.01");
}

TEST_CASE("malformed ids name the offending component") {
  auto message = [](const char* text) {
    try {
      CapabilityId::parse(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("3..08").find("component 2") != std::string::npos);
  CHECK(message("3.x.08").find("component 2") != std::string::npos);
  CHECK(message("3.04.08.01").find("component 4") != std::string::npos);
  CHECK(message("").find("component 1") != std::string::npos);
  CHECK(message("3.04.").find("component 3") != std::string::npos);
}

TEST_CASE("round trip over random ids") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> comp(1, 99), levels(1, 3);
  for (int i = 0; i < 2000; ++i) {
    const int k = levels(rng);
    const CapabilityId a(comp(rng), k > 1 ? std::optional(comp(rng)) : std::nullopt,
                         k > 2 ? std::optional(comp(rng)) : std::nullopt);
    CHECK(CapabilityId::parse(a.str()) == a);
    CHECK(CapabilityId::parse(a.str()).str() == a.str());
  }
}

TEST_CASE("ordering puts absent levels first") {
  CHECK(id("3.04") < id("3.04.02"));
  CHECK(id("3.04.02") < id("3.04.08"));
  CHECK(id("3.04.10") < id("3.05"));
  CHECK(id("1.06.02") < id("3.01.01"));
  CHECK(id("3.04.08").parent() == id("3.04"));
  CHECK(id("3.04.08").main_level() == id("3.04"));
  CHECK_FALSE(id("3").parent().has_value());
}

TEST_CASE("quantification scale") {
  CHECK_THROWS_AS(Quantification(7), ConfigError);
  CHECK_THROWS_AS(Quantification(-1), ConfigError);
  CHECK(Quantification(3).label() == "3-");
  CHECK(Quantification(4).label() == "3+");
  CHECK(Quantification(5).label() == "4");
  CHECK(Quantification(6).label() == "5");
  for (int v = 0; v <= 6; ++v) CHECK(Quantification::from_label(Quantification(v).label()).value() == v);
}

TEST_CASE("catalog fixture reproduces the capability table") {
  const auto cat = fixtures::catalog();
  CHECK(cat.size() == 36);
  int upstream = 0, over = 0;
  for (const auto& e : cat.entries()) (e.category == CapabilityCategory::upstream ? upstream : over)++;
  CHECK(upstream == 12);
  CHECK(over == 24);
  CHECK(cat.find(id("3.04.08"))->name == "Finger -- Pinch Grip -- Unilateral");
  CHECK(cat.find(id("1.01"))->name == "Sitting");
  CHECK(cat.knows(id("4.01")));
  CHECK_FALSE(cat.contains(id("4.01")));
  CHECK_FALSE(cat.knows(id("9.01")));
}

TEST_CASE("sitting over-table set") {
  const auto set = sitting_over_table_set(fixtures::catalog());
  const std::vector<std::string> expected = {
      "1.05.01", "1.05.02", "1.06.01", "1.06.02", "3.01.01", "3.01.02", "3.01.03", "3.02.01",
      "3.02.03", "3.03.02", "3.03.04", "3.03.06", "3.03.08", "3.03.10", "3.04.02", "3.04.04",
      "3.04.06", "3.04.08", "3.04.10", "5.01.01", "5.01.03", "5.01.04"};
  REQUIRE(set.size() == expected.size());
  for (std::size_t i = 0; i < set.size(); ++i) CHECK(set[i].str() == expected[i]);
  CHECK(sitting_over_table_set(CapabilityCatalog{}).empty());
}

TEST_CASE("catalog rejects duplicates and bad rows") {
  std::istringstream dup("# capnet-catalog v1\nid,name,category,posture,laterality\n"
                         "3.04.08,a,over-table,both,n/a\n3.4.8,b,over-table,both,n/a\n");
  CHECK_THROWS_AS(CapabilityCatalog::parse(dup), ParseError);
  std::istringstream bad("# capnet-catalog v1\nid,name,category,posture,laterality\n3.04.08,a,nowhere,both,n/a\n");
  CHECK_THROWS_AS(CapabilityCatalog::parse(bad), ParseError);
  CHECK_THROWS_AS(CapabilityCatalog::load("/nonexistent/catalog.csv"), IoError);
}

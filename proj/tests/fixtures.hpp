#pragma once

#include <filesystem>

#include "capnet/network.hpp"
#include "capnet/taxonomy.hpp"

namespace fixtures {

inline std::filesystem::path data(const char* name) { return std::filesystem::path(CAPNET_DATA_DIR) / name; }

inline capnet::CapabilityCatalog catalog() { return capnet::CapabilityCatalog::load(data("catalog.csv")); }

inline capnet::InterrelationTable interrelations() {
  return capnet::InterrelationTable::load(
      std::vector<std::filesystem::path>{data("interrelations.csv"), data("interrelations_supplement.csv")});
}

inline capnet::ConjugationGraph reference_graph(bool repair = true, capnet::PipelineReport* report = nullptr) {
  return capnet::run_graph_pipeline(interrelations(), catalog(), capnet::read_matrix(data("reference_correlations.csv")),
                                    capnet::StrongCandidateTable::load(data("strong_candidates.csv")), 0.4, repair,
                                    report);
}

inline capnet::CapabilityId id(const char* s) { return capnet::CapabilityId::parse(s); }

}  // namespace fixtures

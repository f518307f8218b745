#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capnet/stats.hpp"
#include "capnet/taxonomy.hpp"

namespace capnet {

enum class Relation { depends_on, condition_for, appears_with, replaced_by };

std::string_view to_string(Relation r);
Relation parse_relation(std::string_view text);
/// Table letter: d, c, a, r.
char relation_letter(Relation r);
Relation relation_from_letter(char letter);

struct RelationKind {
  Relation kind = Relation::appears_with;
  /// The "(M)" annotation: relevant for manufacturing tasks.
  bool manufacturing = false;

  friend bool operator==(const RelationKind&, const RelationKind&) = default;
};

/// One cell of the interrelation table, read from row to column.
struct Interrelation {
  CapabilityId row;
  CapabilityId column;
  RelationKind relation;
};

struct InterrelationTable {
  std::vector<Interrelation> entries;

  static InterrelationTable parse(std::istream& in, std::string_view source_name = "<interrelations>");
  static InterrelationTable load(const std::filesystem::path& path);
  /// Concatenation of several fixture files, in the order given.
  static InterrelationTable load(const std::vector<std::filesystem::path>& paths);
};

enum class CandidateVerdict {
  not_in_table3,
  impossible,
  pretest,
  simultaneous_rotation,
  reach_combination,
  pressure_movement
};

std::string_view to_string(CandidateVerdict v);
CandidateVerdict parse_verdict(std::string_view text);

struct StrongCandidate {
  CapabilityId c1;
  CapabilityId c2;
  double r = 0.0;
  CandidateVerdict verdict = CandidateVerdict::not_in_table3;
};

struct StrongCandidateTable {
  std::vector<StrongCandidate> entries;

  static StrongCandidateTable parse(std::istream& in, std::string_view source_name = "<candidates>");
  static StrongCandidateTable load(const std::filesystem::path& path);
};

enum class EdgeOrigin { interrelation, augmented };
std::string_view to_string(EdgeOrigin o);

struct Edge {
  CapabilityId from;
  CapabilityId to;
  RelationKind relation;
  std::optional<double> correlation;
  EdgeOrigin origin = EdgeOrigin::interrelation;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct GraphNode {
  CapabilityId id;
  std::string name;
  CapabilityCategory category = CapabilityCategory::over_table;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

/// Directed graph of conjugated capabilities. Nodes and edges are kept in
/// canonical order; add_edge refuses parallel edges and self loops.
class ConjugationGraph {
 public:
  void add_node(GraphNode node);
  /// Throws InvariantError on unknown endpoints, self loops or an existing
  /// edge between the same two nodes (either direction).
  void add_edge(Edge edge);
  bool remove_edge(const CapabilityId& from, const CapabilityId& to);

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::vector<CapabilityId> node_ids() const;

  bool has_node(const CapabilityId& id) const;
  const GraphNode* find_node(const CapabilityId& id) const;
  const Edge* find_edge(const CapabilityId& from, const CapabilityId& to) const;
  /// True if an edge joins a and b in either direction.
  bool conjugated(const CapabilityId& a, const CapabilityId& b) const;
  /// Direct successors in canonical order.
  std::vector<CapabilityId> successors(const CapabilityId& id) const;
  bool reachable(const CapabilityId& from, const CapabilityId& to) const;

  /// A directed cycle as a node list (first node repeated at the end), if any.
  std::optional<std::vector<CapabilityId>> find_cycle() const;
  /// Throws CycleError naming a cycle.
  std::vector<CapabilityId> topological_order() const;

  friend bool operator==(const ConjugationGraph&, const ConjugationGraph&) = default;

 private:
  std::vector<GraphNode> nodes_;
  std::vector<Edge> edges_;
};

struct BuildReport {
  /// Symmetric-relation edges dropped because they would close a cycle.
  std::vector<Edge> dropped;
  /// Entries whose endpoints lie outside the node set.
  std::size_t outside_node_set = 0;
  /// Entries merged into an already present pair.
  std::size_t merged = 0;
};

/// Nodes are the sitting over-table set of `catalog`. Orientation:
/// condition_for row->col, depends_on col->row, the symmetric relations from
/// the smaller to the larger id. Duplicate pairs keep the strongest relation
/// (condition/dependency, then appears_with, then replaced_by). Symmetric
/// edges are inserted in canonical order and dropped if they close a cycle.
ConjugationGraph build_graph(const InterrelationTable& table, const CapabilityCatalog& catalog,
                             BuildReport* report = nullptr);

struct PruneReport {
  std::vector<Edge> removed;
};

/// Removes edges with |r| < threshold (undefined r counts as below) and
/// annotates kept edges with r. Throws MissingDataError if an endpoint is
/// not in `corr`.
ConjugationGraph prune_weak(const ConjugationGraph& graph, const CorrelationMatrix& corr, double threshold,
                            PruneReport* report = nullptr);

struct AugmentReport {
  std::vector<Edge> added;
};

/// Adds candidates judged absent from the table (verdict not_in_table3)
/// with a strong correlation; moderate ones only when `repair` is set.
/// Throws CycleError if an addition would close a cycle.
ConjugationGraph augment_strong(const ConjugationGraph& graph, const StrongCandidateTable& candidates,
                                bool repair, AugmentReport* report = nullptr);

struct PipelineReport {
  BuildReport build;
  std::size_t built_edges = 0;
  PruneReport prune;
  AugmentReport augment;
};

/// build_graph, then prune_weak, then augment_strong.
ConjugationGraph run_graph_pipeline(const InterrelationTable& table, const CapabilityCatalog& catalog,
                                    const CorrelationMatrix& corr, const StrongCandidateTable& candidates,
                                    double threshold, bool repair, PipelineReport* report = nullptr);

enum class GraphFormat { dot, json };

void export_graph(std::ostream& out, const ConjugationGraph& graph, GraphFormat format);
ConjugationGraph import_graph(std::istream& in, std::string_view source_name = "<graph>");
ConjugationGraph import_graph(const std::filesystem::path& path);

}  // namespace capnet

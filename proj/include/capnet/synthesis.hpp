#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "capnet/error.hpp"
#include "capnet/network.hpp"

namespace capnet {

using Path = std::vector<CapabilityId>;

struct PathSet {
  std::vector<Path> paths;

  std::size_t size() const { return paths.size(); }
  friend bool operator==(const PathSet&, const PathSet&) = default;
};

/// Nodes eligible for synthesis: over-table nodes of the graph.
std::vector<CapabilityId> synthesis_nodes(const ConjugationGraph& graph);

/// All simple directed paths with at least n_min nodes, restricted to the
/// synthesis nodes, in lexicographic order of their node sequence. OpenMP
/// over start nodes; the serial version yields the same set in the same order.
PathSet enumerate_paths(const ConjugationGraph& graph, int n_min);
PathSet enumerate_paths_serial(const ConjugationGraph& graph, int n_min);

struct CoverProblem {
  PathSet paths;
  int p_max = 6;
  int p_hat_max = 7;
  std::vector<CapabilityId> node_set;

  /// Throws ConfigError unless 1 <= p_max <= p_hat_max.
  void validate() const;
  /// Per node of node_set, the indices of the paths that contain it.
  std::vector<std::vector<std::size_t>> membership() const;
};

struct CoverSolution {
  /// Selected path indices, ascending.
  std::vector<std::size_t> selected;
  std::size_t objective = 0;
  double lp_bound = 0.0;
  std::uint64_t nodes_explored = 0;
};

/// Raised when no selection meets the visit bounds. `binding` names the
/// nodes that make the problem infeasible (may be empty when the conflict
/// only appears in the integer program).
class CoverInfeasibleError : public InfeasibleError {
 public:
  CoverInfeasibleError(const std::string& what, std::vector<CapabilityId> binding)
      : InfeasibleError(what), binding_(std::move(binding)) {}
  const std::vector<CapabilityId>& binding() const { return binding_; }

 private:
  std::vector<CapabilityId> binding_;
};

class CoverSolver {
 public:
  virtual ~CoverSolver() = default;
  /// Exact optimum; among optima the lexicographically smallest index set.
  virtual CoverSolution solve(const CoverProblem& problem) = 0;
};

/// Branch-and-bound over binary path variables with a simplex relaxation
/// bound and a greedy multicover incumbent.
class BranchAndBoundSolver : public CoverSolver {
 public:
  CoverSolution solve(const CoverProblem& problem) override;
};

CoverSolution solve_cover(const CoverProblem& problem);

/// Visit count per node of node_set for a selection.
std::vector<int> visit_counts(const CoverProblem& problem, const std::vector<std::size_t>& selected);

struct SequenceStep {
  CapabilityId id;
  int level = 1;

  friend bool operator==(const SequenceStep&, const SequenceStep&) = default;
};

struct MovementSequence {
  int sequence_id = 0;
  std::vector<SequenceStep> steps;
  std::string trivial_name;

  friend bool operator==(const MovementSequence&, const MovementSequence&) = default;
};

/// Levels per capability rise with encounter order (paths in the given
/// order, then steps). k occurrences are spread evenly over {1..6}. Lifting
/// (5.01.03, 5.01.04) in a path with pinch grip uses {1..3}, with fist grip
/// {4..6}; each group is spread separately. Throws InvariantError if a
/// capability occurs more than p_hat_max times.
std::vector<MovementSequence> annotate_requirements(const std::vector<Path>& selected, int p_hat_max);

std::string name_sequence(const MovementSequence& sequence);

struct LintWarning {
  int sequence_id = 0;
  std::string message;
};

/// Flags lifting up (5.01.03/5.01.04) after a backward reach with no
/// horizontal lift in between.
std::vector<LintWarning> lint_sequences(const std::vector<MovementSequence>& sequences);

/// Rows: sequence_id,trivial_name,steps ("id:level" tokens separated by spaces).
void write_sequences_csv(std::ostream& out, const std::vector<MovementSequence>& sequences);
std::vector<MovementSequence> read_sequences_csv(std::istream& in, std::string_view source_name = "<sequences>");
/// Human-readable table; each step is shaded light to dark by level.
void write_sequences_text(std::ostream& out, const std::vector<MovementSequence>& sequences);

}  // namespace capnet

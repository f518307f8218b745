#include "capnet/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "capnet/csv.hpp"
#include "capnet/lp.hpp"

namespace capnet {

namespace {

const CapabilityId kPinch = CapabilityId::parse("3.04.08");
const CapabilityId kFist = CapabilityId::parse("3.04.02");
const CapabilityId kLiftHorizontal = CapabilityId::parse("5.01.01");
const CapabilityId kLiftEye = CapabilityId::parse("5.01.03");
const CapabilityId kLiftHead = CapabilityId::parse("5.01.04");
const CapabilityId kReachUp = CapabilityId::parse("3.03.02");
const CapabilityId kReachForward = CapabilityId::parse("3.03.04");
const CapabilityId kReachSide = CapabilityId::parse("3.03.06");
const CapabilityId kReachBack = CapabilityId::parse("3.03.08");
const CapabilityId kArmsOverHead = CapabilityId::parse("1.06.02");

bool contains(const Path& p, const CapabilityId& id) { return std::find(p.begin(), p.end(), id) != p.end(); }

std::string join_ids(const std::vector<CapabilityId>& ids) {
  std::vector<std::string> s;
  for (const auto& id : ids) s.push_back(id.str());
  return fmt::format("{}", fmt::join(s, ", "));
}

struct Adjacency {
  std::vector<CapabilityId> nodes;
  std::vector<std::vector<std::size_t>> next;
};

Adjacency synthesis_adjacency(const ConjugationGraph& graph) {
  Adjacency adj;
  adj.nodes = synthesis_nodes(graph);
  adj.next.resize(adj.nodes.size());
  auto index = [&](const CapabilityId& id) -> long {
    auto it = std::lower_bound(adj.nodes.begin(), adj.nodes.end(), id);
    return it != adj.nodes.end() && *it == id ? it - adj.nodes.begin() : -1;
  };
  for (const auto& e : graph.edges()) {
    const long f = index(e.from), t = index(e.to);
    if (f >= 0 && t >= 0) adj.next[static_cast<std::size_t>(f)].push_back(static_cast<std::size_t>(t));
  }
  for (auto& n : adj.next) std::sort(n.begin(), n.end());
  return adj;
}

void paths_from(const Adjacency& adj, std::size_t start, std::size_t n_min, std::vector<Path>& out) {
  std::vector<std::size_t> stack{start};
  std::vector<bool> on_path(adj.nodes.size(), false);
  on_path[start] = true;
  auto emit = [&] {
    Path p;
    for (auto v : stack) p.push_back(adj.nodes[v]);
    out.push_back(std::move(p));
  };
  // iterative DFS; cursor[k] is the next successor to try at depth k
  std::vector<std::size_t> cursor{0};
  if (n_min <= 1) emit();
  while (!stack.empty()) {
    const auto v = stack.back();
    auto& c = cursor.back();
    if (c < adj.next[v].size()) {
      const auto w = adj.next[v][c++];
      if (on_path[w]) continue;
      stack.push_back(w);
      cursor.push_back(0);
      on_path[w] = true;
      if (stack.size() >= n_min) emit();
    } else {
      on_path[v] = false;
      stack.pop_back();
      cursor.pop_back();
    }
  }
}

void check_n_min(int n_min) {
  if (n_min < 1) throw ConfigError(fmt::format("n_min must be at least 1, got {}", n_min));
}

}  // namespace

std::vector<CapabilityId> synthesis_nodes(const ConjugationGraph& graph) {
  std::vector<CapabilityId> out;
  for (const auto& n : graph.nodes())
    if (n.category == CapabilityCategory::over_table) out.push_back(n.id);
  return out;
}

PathSet enumerate_paths_serial(const ConjugationGraph& graph, int n_min) {
  check_n_min(n_min);
  const auto adj = synthesis_adjacency(graph);
  PathSet out;
  for (std::size_t s = 0; s < adj.nodes.size(); ++s) paths_from(adj, s, static_cast<std::size_t>(n_min), out.paths);
  return out;
}

PathSet enumerate_paths(const ConjugationGraph& graph, int n_min) {
  check_n_min(n_min);
  const auto adj = synthesis_adjacency(graph);
  std::vector<std::vector<Path>> per_start(adj.nodes.size());
  const auto n = static_cast<long>(adj.nodes.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long s = 0; s < n; ++s)
    paths_from(adj, static_cast<std::size_t>(s), static_cast<std::size_t>(n_min), per_start[static_cast<std::size_t>(s)]);
  PathSet out;
  for (auto& v : per_start)
    for (auto& p : v) out.paths.push_back(std::move(p));
  return out;
}

void CoverProblem::validate() const {
  if (p_max < 1) throw ConfigError(fmt::format("p_max must be at least 1, got {}", p_max));
  if (p_hat_max < p_max)
    throw ConfigError(fmt::format("p_hat_max ({}) must not be below p_max ({})", p_hat_max, p_max));
}

std::vector<std::vector<std::size_t>> CoverProblem::membership() const {
  std::vector<std::vector<std::size_t>> out(node_set.size());
  for (std::size_t w = 0; w < paths.paths.size(); ++w)
    for (std::size_t j = 0; j < node_set.size(); ++j)
      if (contains(paths.paths[w], node_set[j])) out[j].push_back(w);
  return out;
}

std::vector<int> visit_counts(const CoverProblem& problem, const std::vector<std::size_t>& selected) {
  std::vector<int> counts(problem.node_set.size(), 0);
  for (auto w : selected)
    for (std::size_t j = 0; j < problem.node_set.size(); ++j)
      if (contains(problem.paths.paths.at(w), problem.node_set[j])) ++counts[j];
  return counts;
}

namespace {

constexpr double kIntTol = 1e-6;

class CoverSearch {
 public:
  explicit CoverSearch(const CoverProblem& problem)
      : lo_(problem.p_max), hi_(problem.p_hat_max), n_(problem.paths.size()), m_(problem.node_set.size()) {
    rows_of_.resize(n_);
    const auto memb = problem.membership();
    for (std::size_t j = 0; j < m_; ++j)
      for (auto w : memb[j]) rows_of_[w].push_back(j);
    fixed_.assign(n_, -1);
    row_ones_.assign(m_, 0);
    row_free_.assign(m_, 0);
    for (std::size_t w = 0; w < n_; ++w)
      for (auto j : rows_of_[w]) ++row_free_[j];
  }

  std::size_t n() const { return n_; }

  /// Greedy multicover respecting the upper bound; empty if it gets stuck.
  std::optional<std::vector<std::size_t>> greedy() const {
    std::vector<int> count(m_, 0);
    std::vector<bool> used(n_, false);
    std::vector<std::size_t> sel;
    while (true) {
      bool done = true;
      for (std::size_t j = 0; j < m_; ++j) done = done && count[j] >= lo_;
      if (done) return sel;
      long pick = -1;
      int best_gain = 0;
      for (std::size_t w = 0; w < n_; ++w) {
        if (used[w]) continue;
        int gain = 0;
        bool ok = true;
        for (auto j : rows_of_[w]) {
          if (count[j] + 1 > hi_) ok = false;
          if (count[j] < lo_) ++gain;
        }
        if (ok && gain > best_gain) best_gain = gain, pick = static_cast<long>(w);
      }
      if (pick < 0) return std::nullopt;
      used[static_cast<std::size_t>(pick)] = true;
      sel.push_back(static_cast<std::size_t>(pick));
      for (auto j : rows_of_[static_cast<std::size_t>(pick)]) ++count[j];
    }
  }

  void fix(std::size_t w, int v) {
    fixed_[w] = static_cast<signed char>(v);
    for (auto j : rows_of_[w]) {
      --row_free_[j];
      if (v == 1) ++row_ones_[j];
    }
    if (v == 1) ++ones_;
  }

  void unfix(std::size_t w) {
    const int v = fixed_[w];
    fixed_[w] = -1;
    for (auto j : rows_of_[w]) {
      ++row_free_[j];
      if (v == 1) --row_ones_[j];
    }
    if (v == 1) --ones_;
  }

  int fixed(std::size_t w) const { return fixed_[w]; }
  std::size_t ones() const { return ones_; }

  /// Depth-first branch and bound below the current fixings. Improves
  /// `best_` (selections strictly smaller than best_size_).
  void search() {
    ++nodes_;
    for (std::size_t j = 0; j < m_; ++j)
      if (row_ones_[j] > hi_ || row_ones_[j] + row_free_[j] < lo_) return;
    std::vector<std::size_t> free;
    for (std::size_t w = 0; w < n_; ++w)
      if (fixed_[w] < 0) free.push_back(w);

    const auto relax = relaxation(free);
    if (relax.status != lp::Status::optimal) return;
    const double bound = static_cast<double>(ones_) + relax.objective;
    if (nodes_ == 1) root_bound_ = bound;
    if (static_cast<std::size_t>(std::ceil(bound - kIntTol)) >= best_size_) return;

    long branch = -1;
    double branch_value = -1.0;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const double x = relax.x[k];
      if (x > kIntTol && x < 1.0 - kIntTol && x > branch_value + kIntTol)
        branch_value = x, branch = static_cast<long>(free[k]);
    }
    if (branch < 0) {
      std::vector<std::size_t> sel;
      for (std::size_t w = 0; w < n_; ++w)
        if (fixed_[w] == 1) sel.push_back(w);
      for (std::size_t k = 0; k < free.size(); ++k)
        if (relax.x[k] > 0.5) sel.push_back(free[k]);
      std::sort(sel.begin(), sel.end());
      if (!satisfies(sel)) throw InvariantError("integral relaxation violates the visit bounds");
      best_size_ = sel.size();
      best_ = std::move(sel);
      return;
    }
    const auto w = static_cast<std::size_t>(branch);
    fix(w, 1);
    search();
    unfix(w);
    if (stop_at_first_ && best_) return;
    fix(w, 0);
    search();
    unfix(w);
  }

  bool satisfies(const std::vector<std::size_t>& sel) const {
    std::vector<int> count(m_, 0);
    for (auto w : sel)
      for (auto j : rows_of_[w]) ++count[j];
    for (auto c : count)
      if (c < lo_ || c > hi_) return false;
    return true;
  }

  /// Rows whose bounds cannot be met by the relaxation at the root.
  std::vector<std::size_t> root_violations() {
    std::vector<std::size_t> all(n_);
    for (std::size_t w = 0; w < n_; ++w) all[w] = w;
    const auto r = relaxation(all);
    std::vector<std::size_t> rows;
    for (std::size_t j = 0; j < m_; ++j)
      if (r.status != lp::Status::optimal && r.row_violation[j] > 1e-7) rows.push_back(j);
    return rows;
  }

  std::optional<std::vector<std::size_t>> best_;
  std::size_t best_size_ = 0;
  bool stop_at_first_ = false;
  std::uint64_t nodes_ = 0;
  double root_bound_ = 0.0;

 private:
  lp::Result relaxation(const std::vector<std::size_t>& free) const {
    lp::Problem p;
    p.rows = m_;
    p.cols = free.size();
    p.a.assign(p.rows * p.cols, 0.0);
    for (std::size_t k = 0; k < free.size(); ++k)
      for (auto j : rows_of_[free[k]]) p.coef(j, k) = 1.0;
    for (std::size_t j = 0; j < m_; ++j) {
      p.row_lo.push_back(static_cast<double>(lo_ - row_ones_[j]));
      p.row_hi.push_back(static_cast<double>(hi_ - row_ones_[j]));
    }
    p.col_lo.assign(p.cols, 0.0);
    p.col_hi.assign(p.cols, 1.0);
    p.cost.assign(p.cols, 1.0);
    return lp::solve(p);
  }

  int lo_, hi_;
  std::size_t n_, m_;
  std::vector<std::vector<std::size_t>> rows_of_;
  std::vector<signed char> fixed_;
  std::vector<int> row_ones_, row_free_;
  std::size_t ones_ = 0;
};

}  // namespace

CoverSolution BranchAndBoundSolver::solve(const CoverProblem& problem) {
  problem.validate();
  const auto memb = problem.membership();
  std::vector<CapabilityId> short_nodes;
  for (std::size_t j = 0; j < problem.node_set.size(); ++j)
    if (static_cast<int>(memb[j].size()) < problem.p_max) short_nodes.push_back(problem.node_set[j]);
  if (!short_nodes.empty())
    throw CoverInfeasibleError(fmt::format("infeasible: fewer than {} candidate paths contain {}",
                                           problem.p_max, join_ids(short_nodes)),
                               short_nodes);

  CoverSearch search(problem);
  search.best_size_ = search.n() + 1;
  if (auto g = search.greedy()) {
    std::sort(g->begin(), g->end());
    search.best_size_ = g->size();
    search.best_ = std::move(g);
  }
  search.search();
  if (!search.best_) {
    std::vector<CapabilityId> binding;
    for (auto j : search.root_violations()) binding.push_back(problem.node_set[j]);
    if (binding.empty())
      throw CoverInfeasibleError("infeasible: no 0/1 path selection meets the visit bounds", binding);
    throw CoverInfeasibleError(
        fmt::format("infeasible: visit bounds [{}, {}] cannot be met at {}", problem.p_max, problem.p_hat_max,
                    join_ids(binding)),
        binding);
  }

  CoverSolution sol;
  sol.objective = search.best_size_;
  sol.lp_bound = search.root_bound_;

  // lexicographically smallest optimum: decide x_0, x_1, ... in turn, keeping
  // a witness optimum consistent with all decisions so far
  auto witness = *search.best_;
  search.stop_at_first_ = true;
  for (std::size_t w = 0; w < search.n() && search.ones() < sol.objective; ++w) {
    if (std::binary_search(witness.begin(), witness.end(), w)) {
      search.fix(w, 1);
      continue;
    }
    search.fix(w, 1);
    search.best_.reset();
    search.best_size_ = sol.objective + 1;
    search.search();
    if (search.best_) {
      witness = *search.best_;
      continue;
    }
    search.unfix(w);
    search.fix(w, 0);
  }
  sol.selected = witness;
  sol.nodes_explored = search.nodes_;

  if (sol.selected.size() != sol.objective) throw InvariantError("cover solution size differs from objective");
  const auto counts = visit_counts(problem, sol.selected);
  for (std::size_t j = 0; j < counts.size(); ++j)
    if (counts[j] < problem.p_max || counts[j] > problem.p_hat_max)
      throw InvariantError(fmt::format("cover solution visits {} {} times", problem.node_set[j].str(), counts[j]));
  return sol;
}

CoverSolution solve_cover(const CoverProblem& problem) {
  BranchAndBoundSolver solver;
  return solver.solve(problem);
}

std::vector<MovementSequence> annotate_requirements(const std::vector<Path>& selected, int p_hat_max) {
  enum Group { all, pinch, fist };
  struct Slot {
    std::size_t path, step;
  };
  std::map<std::pair<CapabilityId, int>, std::vector<Slot>> occurrences;
  std::map<CapabilityId, int> totals;
  for (std::size_t p = 0; p < selected.size(); ++p) {
    for (std::size_t s = 0; s < selected[p].size(); ++s) {
      const auto& id = selected[p][s];
      int group = all;
      if (id == kLiftEye || id == kLiftHead) {
        if (contains(selected[p], kPinch))
          group = pinch;
        else if (contains(selected[p], kFist))
          group = fist;
      }
      occurrences[{id, group}].push_back({p, s});
      ++totals[id];
    }
  }
  for (const auto& [id, k] : totals)
    if (k > p_hat_max)
      throw InvariantError(fmt::format("{} occurs {} times, above the visit limit {}", id.str(), k, p_hat_max));

  std::vector<MovementSequence> out(selected.size());
  for (std::size_t p = 0; p < selected.size(); ++p) {
    out[p].sequence_id = static_cast<int>(p + 1);
    for (const auto& id : selected[p]) out[p].steps.push_back({id, 1});
  }
  for (const auto& [key, slots] : occurrences) {
    const int lo = key.second == fist ? 4 : 1;
    const int hi = key.second == pinch ? 3 : 6;
    const auto k = slots.size();
    for (std::size_t i = 0; i < k; ++i) {
      const int level =
          k == 1 ? lo
                 : lo + static_cast<int>(std::lround(static_cast<double>(i) * (hi - lo) / static_cast<double>(k - 1)));
      out[slots[i].path].steps[slots[i].step].level = level;
    }
  }
  for (auto& seq : out) seq.trivial_name = name_sequence(seq);
  return out;
}

std::string name_sequence(const MovementSequence& sequence) {
  if (sequence.steps.empty()) return "unnamed";
  auto has = [&](const CapabilityId& id) {
    return std::any_of(sequence.steps.begin(), sequence.steps.end(), [&](const SequenceStep& s) { return s.id == id; });
  };
  if (has(kReachBack)) return "pull out, from behind";
  if (has(kArmsOverHead) || has(kReachUp)) return "reach & push, overhead";
  std::string direction = "in place";
  for (const auto& s : sequence.steps) {
    if (s.id == kReachForward) direction = "frontal";
    else if (s.id == kReachSide) direction = "sideways";
    else continue;
    break;
  }
  const bool lifts = std::any_of(sequence.steps.begin(), sequence.steps.end(), [](const SequenceStep& s) {
    return s.id.complex() == 5 && s.id.main() == 1;
  });
  if (lifts && (has(kPinch) || has(kFist))) return "pick & place, " + direction;
  return "reach & push, " + direction;
}

std::vector<LintWarning> lint_sequences(const std::vector<MovementSequence>& sequences) {
  std::vector<LintWarning> out;
  for (const auto& seq : sequences) {
    bool arm_behind = false;
    for (const auto& s : seq.steps) {
      if (s.id == kReachBack) arm_behind = true;
      if (s.id == kLiftHorizontal) arm_behind = false;
      if ((s.id == kLiftEye || s.id == kLiftHead) && arm_behind)
        out.push_back({seq.sequence_id,
                       fmt::format("sequence {}: upward lift {} while the arm is still behind the body after {}; "
                                   "insert {} before it or exclude upward lifts after a backward reach",
                                   seq.sequence_id, s.id.str(), kReachBack.str(), kLiftHorizontal.str())});
    }
  }
  return out;
}

void write_sequences_csv(std::ostream& out, const std::vector<MovementSequence>& sequences) {
  out << "sequence_id,trivial_name,steps\n";
  for (const auto& seq : sequences) {
    std::vector<std::string> tokens;
    for (const auto& s : seq.steps) tokens.push_back(fmt::format("{}:{}", s.id.str(), s.level));
    csv::write_row(out, {std::to_string(seq.sequence_id), seq.trivial_name, fmt::format("{}", fmt::join(tokens, " "))});
  }
}

std::vector<MovementSequence> read_sequences_csv(std::istream& in, std::string_view source_name) {
  const auto doc = csv::parse(in, source_name);
  const auto id_c = doc.column("sequence_id"), name_c = doc.column("trivial_name"), steps_c = doc.column("steps");
  std::vector<MovementSequence> out;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& row = doc.rows[r];
    try {
      MovementSequence seq;
      seq.sequence_id = std::stoi(row[id_c]);
      seq.trivial_name = row[name_c];
      std::string_view rest = row[steps_c];
      while (!rest.empty()) {
        const auto sp = rest.find(' ');
        const auto token = rest.substr(0, sp);
        rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
        if (token.empty()) continue;
        const auto colon = token.find(':');
        if (colon == std::string_view::npos) throw ParseError(fmt::format("step '{}' lacks ':level'", token));
        const int level = std::stoi(std::string(token.substr(colon + 1)));
        if (level < 1 || level > Quantification::kMax)
          throw ParseError(fmt::format("step '{}' level outside 1..6", token));
        seq.steps.push_back({CapabilityId::parse(token.substr(0, colon)), level});
      }
      out.push_back(std::move(seq));
    } catch (const std::logic_error&) {
      throw ParseError(fmt::format("{}:{}: malformed sequence row", source_name, doc.lines[r]));
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("{}:{}: {}", source_name, doc.lines[r], e.what()));
    }
  }
  return out;
}

void write_sequences_text(std::ostream& out, const std::vector<MovementSequence>& sequences) {
  static constexpr const char* kShade[] = {"", "░", "░░", "▒", "▒▒", "▓", "█"};
  std::size_t name_width = 4;
  for (const auto& seq : sequences) name_width = std::max(name_width, seq.trivial_name.size());
  for (const auto& seq : sequences) {
    out << fmt::format("{:>3}  {:<{}} ", seq.sequence_id, seq.trivial_name, name_width);
    for (const auto& s : seq.steps) out << fmt::format(" {}[{}{}]", s.id.str(), s.level, kShade[s.level]);
    out << '\n';
  }
}

}  // namespace capnet

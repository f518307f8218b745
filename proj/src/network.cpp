#include "capnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "capnet/csv.hpp"
#include "capnet/error.hpp"

namespace capnet {

using nlohmann::json;

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::depends_on: return "depends_on";
    case Relation::condition_for: return "condition_for";
    case Relation::appears_with: return "appears_with";
    case Relation::replaced_by: return "replaced_by";
  }
  return "appears_with";
}

Relation parse_relation(std::string_view text) {
  for (auto r : {Relation::depends_on, Relation::condition_for, Relation::appears_with, Relation::replaced_by})
    if (text == to_string(r)) return r;
  if (text.size() == 1) return relation_from_letter(text[0]);
  throw ParseError(fmt::format("unknown relation '{}'", text));
}

char relation_letter(Relation r) {
  switch (r) {
    case Relation::depends_on: return 'd';
    case Relation::condition_for: return 'c';
    case Relation::appears_with: return 'a';
    case Relation::replaced_by: return 'r';
  }
  return 'a';
}

Relation relation_from_letter(char letter) {
  switch (letter) {
    case 'd': return Relation::depends_on;
    case 'c': return Relation::condition_for;
    case 'a': return Relation::appears_with;
    case 'r': return Relation::replaced_by;
    default: throw ParseError(fmt::format("unknown relation letter '{}'", letter));
  }
}

std::string_view to_string(CandidateVerdict v) {
  switch (v) {
    case CandidateVerdict::not_in_table3: return "not_in_table3";
    case CandidateVerdict::impossible: return "impossible";
    case CandidateVerdict::pretest: return "pretest";
    case CandidateVerdict::simultaneous_rotation: return "simultaneous_rotation";
    case CandidateVerdict::reach_combination: return "reach_combination";
    case CandidateVerdict::pressure_movement: return "pressure_movement";
  }
  return "impossible";
}

CandidateVerdict parse_verdict(std::string_view text) {
  for (auto v : {CandidateVerdict::not_in_table3, CandidateVerdict::impossible, CandidateVerdict::pretest,
                 CandidateVerdict::simultaneous_rotation, CandidateVerdict::reach_combination,
                 CandidateVerdict::pressure_movement})
    if (text == to_string(v)) return v;
  throw ParseError(fmt::format("unknown candidate verdict '{}'", text));
}

std::string_view to_string(EdgeOrigin o) {
  return o == EdgeOrigin::augmented ? "augmented" : "interrelation";
}

namespace {

void check_version(const csv::Document& doc, std::string_view tag, std::string_view source_name) {
  const auto expected = fmt::format("# capnet-{} v1", tag);
  if (doc.comments.empty() || doc.comments.front() != expected)
    throw ParseError(fmt::format("{}: missing '{}' version line", source_name, expected));
}

std::ifstream open_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

}  // namespace

InterrelationTable InterrelationTable::parse(std::istream& in, std::string_view source_name) {
  const auto doc = csv::parse(in, source_name);
  check_version(doc, "interrelations", source_name);
  const auto row_c = doc.column("row_id"), col_c = doc.column("col_id");
  const auto rel_c = doc.column("relation"), m_c = doc.column("m_flag");
  InterrelationTable t;
  for (std::size_t i = 0; i < doc.rows.size(); ++i) {
    const auto& row = doc.rows[i];
    try {
      Interrelation e{CapabilityId::parse(row[row_c]), CapabilityId::parse(row[col_c]), {}};
      if (row[rel_c].size() != 1) throw ParseError(fmt::format("relation '{}' is not a letter", row[rel_c]));
      e.relation.kind = relation_from_letter(row[rel_c][0]);
      if (row[m_c] != "0" && row[m_c] != "1") throw ParseError(fmt::format("m_flag '{}' is not 0/1", row[m_c]));
      e.relation.manufacturing = row[m_c] == "1";
      if (e.row == e.column) throw ParseError(fmt::format("self relation on {}", e.row.str()));
      t.entries.push_back(e);
    } catch (const ParseError& err) {
      throw ParseError(fmt::format("{}:{}: {}", source_name, doc.lines[i], err.what()));
    }
  }
  return t;
}

InterrelationTable InterrelationTable::load(const std::filesystem::path& path) {
  auto in = open_file(path);
  return parse(in, path.string());
}

InterrelationTable InterrelationTable::load(const std::vector<std::filesystem::path>& paths) {
  InterrelationTable out;
  for (const auto& p : paths) {
    auto t = load(p);
    out.entries.insert(out.entries.end(), t.entries.begin(), t.entries.end());
  }
  return out;
}

StrongCandidateTable StrongCandidateTable::parse(std::istream& in, std::string_view source_name) {
  const auto doc = csv::parse(in, source_name);
  check_version(doc, "candidates", source_name);
  const auto c1 = doc.column("c1"), c2 = doc.column("c2"), rc = doc.column("r"), vc = doc.column("verdict");
  StrongCandidateTable t;
  for (std::size_t i = 0; i < doc.rows.size(); ++i) {
    const auto& row = doc.rows[i];
    try {
      StrongCandidate c{CapabilityId::parse(row[c1]), CapabilityId::parse(row[c2]), 0.0,
                        parse_verdict(row[vc])};
      std::size_t pos = 0;
      try {
        c.r = std::stod(row[rc], &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != row[rc].size() || std::abs(c.r) > 1.0)
        throw ParseError(fmt::format("correlation '{}' is not a number in [-1, 1]", row[rc]));
      t.entries.push_back(c);
    } catch (const ParseError& err) {
      throw ParseError(fmt::format("{}:{}: {}", source_name, doc.lines[i], err.what()));
    }
  }
  return t;
}

StrongCandidateTable StrongCandidateTable::load(const std::filesystem::path& path) {
  auto in = open_file(path);
  return parse(in, path.string());
}

void ConjugationGraph::add_node(GraphNode node) {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), node.id,
                             [](const GraphNode& n, const CapabilityId& id) { return n.id < id; });
  if (it != nodes_.end() && it->id == node.id)
    throw InvariantError(fmt::format("duplicate graph node {}", node.id.str()));
  nodes_.insert(it, std::move(node));
}

void ConjugationGraph::add_edge(Edge edge) {
  if (!has_node(edge.from) || !has_node(edge.to))
    throw InvariantError(
        fmt::format("edge {}->{} references an unknown node", edge.from.str(), edge.to.str()));
  if (edge.from == edge.to) throw InvariantError(fmt::format("self loop on {}", edge.from.str()));
  if (conjugated(edge.from, edge.to))
    throw InvariantError(fmt::format("parallel edge {}->{}", edge.from.str(), edge.to.str()));
  if (edge.correlation && std::abs(*edge.correlation) > 1.0)
    throw InvariantError(fmt::format("edge {}->{} carries correlation {} outside [-1, 1]", edge.from.str(),
                                     edge.to.str(), *edge.correlation));
  auto key = [](const Edge& e) { return std::tie(e.from, e.to); };
  auto it = std::lower_bound(edges_.begin(), edges_.end(), edge,
                             [&](const Edge& a, const Edge& b) { return key(a) < key(b); });
  edges_.insert(it, std::move(edge));
}

bool ConjugationGraph::remove_edge(const CapabilityId& from, const CapabilityId& to) {
  auto it = std::find_if(edges_.begin(), edges_.end(),
                         [&](const Edge& e) { return e.from == from && e.to == to; });
  if (it == edges_.end()) return false;
  edges_.erase(it);
  return true;
}

std::vector<CapabilityId> ConjugationGraph::node_ids() const {
  std::vector<CapabilityId> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.id);
  return out;
}

const GraphNode* ConjugationGraph::find_node(const CapabilityId& id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                             [](const GraphNode& n, const CapabilityId& v) { return n.id < v; });
  return it != nodes_.end() && it->id == id ? &*it : nullptr;
}

bool ConjugationGraph::has_node(const CapabilityId& id) const { return find_node(id) != nullptr; }

const Edge* ConjugationGraph::find_edge(const CapabilityId& from, const CapabilityId& to) const {
  for (const auto& e : edges_)
    if (e.from == from && e.to == to) return &e;
  return nullptr;
}

bool ConjugationGraph::conjugated(const CapabilityId& a, const CapabilityId& b) const {
  return find_edge(a, b) != nullptr || find_edge(b, a) != nullptr;
}

std::vector<CapabilityId> ConjugationGraph::successors(const CapabilityId& id) const {
  std::vector<CapabilityId> out;
  for (const auto& e : edges_)
    if (e.from == id) out.push_back(e.to);
  return out;
}

bool ConjugationGraph::reachable(const CapabilityId& from, const CapabilityId& to) const {
  std::set<CapabilityId> seen;
  std::vector<CapabilityId> stack{from};
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (v == to) return true;
    if (!seen.insert(v).second) continue;
    for (const auto& s : successors(v)) stack.push_back(s);
  }
  return false;
}

std::optional<std::vector<CapabilityId>> ConjugationGraph::find_cycle() const {
  enum { white, grey, black };
  std::map<CapabilityId, int> color;
  std::vector<CapabilityId> stack;
  std::optional<std::vector<CapabilityId>> cycle;
  std::function<bool(const CapabilityId&)> visit = [&](const CapabilityId& v) {
    color[v] = grey;
    stack.push_back(v);
    for (const auto& s : successors(v)) {
      if (color[s] == grey) {
        auto it = std::find(stack.begin(), stack.end(), s);
        cycle = std::vector<CapabilityId>(it, stack.end());
        cycle->push_back(s);
        return true;
      }
      if (color[s] == white && visit(s)) return true;
    }
    stack.pop_back();
    color[v] = black;
    return false;
  };
  for (const auto& n : nodes_)
    if (color[n.id] == white && visit(n.id)) return cycle;
  return std::nullopt;
}

std::vector<CapabilityId> ConjugationGraph::topological_order() const {
  if (const auto c = find_cycle()) {
    std::vector<std::string> s;
    for (const auto& id : *c) s.push_back(id.str());
    throw CycleError(fmt::format("graph has a cycle: {}", fmt::join(s, " -> ")));
  }
  std::map<CapabilityId, int> indegree;
  for (const auto& n : nodes_) indegree[n.id] = 0;
  for (const auto& e : edges_) ++indegree[e.to];
  std::set<CapabilityId> ready;
  for (const auto& [id, d] : indegree)
    if (d == 0) ready.insert(id);
  std::vector<CapabilityId> order;
  while (!ready.empty()) {
    const auto v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (const auto& s : successors(v))
      if (--indegree[s] == 0) ready.insert(s);
  }
  return order;
}

namespace {

int precedence(Relation r) {
  switch (r) {
    case Relation::condition_for:
    case Relation::depends_on: return 0;
    case Relation::appears_with: return 1;
    case Relation::replaced_by: return 2;
  }
  return 2;
}

bool is_skeleton(Relation r) { return precedence(r) == 0; }

std::string cycle_text(const std::vector<CapabilityId>& cycle) {
  std::vector<std::string> s;
  for (const auto& id : cycle) s.push_back(id.str());
  return fmt::format("{}", fmt::join(s, " -> "));
}

}  // namespace

ConjugationGraph build_graph(const InterrelationTable& table, const CapabilityCatalog& catalog,
                             BuildReport* report) {
  BuildReport local;
  BuildReport& rep = report ? *report : local;
  rep = {};

  ConjugationGraph g;
  for (const auto& id : sitting_over_table_set(catalog)) {
    const auto* e = catalog.find(id);
    g.add_node({id, e->name, e->category});
  }

  // unordered pair -> oriented edge with the strongest relation seen so far
  std::map<std::pair<CapabilityId, CapabilityId>, Edge> best;
  for (const auto& entry : table.entries) {
    if (!g.has_node(entry.row) || !g.has_node(entry.column)) {
      ++rep.outside_node_set;
      continue;
    }
    Edge e;
    e.relation = entry.relation;
    switch (entry.relation.kind) {
      case Relation::condition_for: e.from = entry.row, e.to = entry.column; break;
      case Relation::depends_on: e.from = entry.column, e.to = entry.row; break;
      default:
        e.from = std::min(entry.row, entry.column);
        e.to = std::max(entry.row, entry.column);
    }
    const auto key = std::minmax(e.from, e.to);
    auto it = best.find(key);
    if (it == best.end()) {
      best.emplace(key, e);
      continue;
    }
    ++rep.merged;
    const int p_new = precedence(e.relation.kind), p_old = precedence(it->second.relation.kind);
    if (p_new == 0 && p_old == 0 && it->second.from != e.from)
      throw CycleError(fmt::format("conditions contradict each other: {} -> {} -> {}", e.from.str(),
                                   e.to.str(), e.from.str()));
    if (p_new < p_old) it->second = e;
  }

  std::vector<Edge> symmetric;
  for (const auto& [key, e] : best) {
    if (is_skeleton(e.relation.kind))
      g.add_edge(e);
    else
      symmetric.push_back(e);
  }
  if (const auto c = g.find_cycle())
    throw CycleError(fmt::format("condition/dependency skeleton has a cycle: {}", cycle_text(*c)));

  std::sort(symmetric.begin(), symmetric.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  for (const auto& e : symmetric) {
    if (g.reachable(e.to, e.from)) {
      rep.dropped.push_back(e);
      continue;
    }
    g.add_edge(e);
  }
  return g;
}

ConjugationGraph prune_weak(const ConjugationGraph& graph, const CorrelationMatrix& corr, double threshold,
                            PruneReport* report) {
  PruneReport local;
  PruneReport& rep = report ? *report : local;
  rep = {};
  ConjugationGraph out;
  for (const auto& n : graph.nodes()) out.add_node(n);
  for (auto e : graph.edges()) {
    const auto r = corr.value(e.from, e.to);
    if (!r || std::abs(*r) < threshold) {
      rep.removed.push_back(e);
      continue;
    }
    e.correlation = *r;
    out.add_edge(e);
  }
  return out;
}

ConjugationGraph augment_strong(const ConjugationGraph& graph, const StrongCandidateTable& candidates,
                                bool repair, AugmentReport* report) {
  AugmentReport local;
  AugmentReport& rep = report ? *report : local;
  rep = {};
  ConjugationGraph out = graph;
  for (const auto& c : candidates.entries) {
    if (c.verdict != CandidateVerdict::not_in_table3) continue;
    const auto strength = classify_correlation(c.r);
    if (strength == CorrelationStrength::weak) continue;
    if (strength == CorrelationStrength::moderate && !repair) continue;
    if (!out.has_node(c.c1) || !out.has_node(c.c2) || out.conjugated(c.c1, c.c2)) continue;
    if (out.reachable(c.c2, c.c1))
      throw CycleError(fmt::format("adding {} -> {} would close a cycle", c.c1.str(), c.c2.str()));
    Edge e{c.c1, c.c2, {Relation::appears_with, false}, c.r, EdgeOrigin::augmented};
    out.add_edge(e);
    rep.added.push_back(e);
  }
  return out;
}

ConjugationGraph run_graph_pipeline(const InterrelationTable& table, const CapabilityCatalog& catalog,
                                    const CorrelationMatrix& corr, const StrongCandidateTable& candidates,
                                    double threshold, bool repair, PipelineReport* report) {
  PipelineReport local;
  PipelineReport& rep = report ? *report : local;
  auto g = build_graph(table, catalog, &rep.build);
  rep.built_edges = g.edges().size();
  g = prune_weak(g, corr, threshold, &rep.prune);
  g = augment_strong(g, candidates, repair, &rep.augment);
  if (g.edges().size() != rep.built_edges - rep.prune.removed.size() + rep.augment.added.size())
    throw InvariantError("edge bookkeeping mismatch in graph pipeline");
  return g;
}

namespace {

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + '"';
}

}  // namespace

void export_graph(std::ostream& out, const ConjugationGraph& graph, GraphFormat format) {
  if (format == GraphFormat::dot) {
    out << "digraph conjugations {\n  rankdir=LR;\n  node [shape=box];\n";
    for (const auto& n : graph.nodes())
      out << "  " << dot_quote(n.id.str()) << " [label=" << dot_quote(n.id.str() + " " + n.name) << "];\n";
    for (const auto& e : graph.edges()) {
      out << "  " << dot_quote(e.from.str()) << " -> " << dot_quote(e.to.str()) << " [label="
          << dot_quote(std::string(1, relation_letter(e.relation.kind)) + (e.relation.manufacturing ? "(M)" : ""));
      if (e.origin == EdgeOrigin::augmented) out << ", style=dashed";
      out << "];\n";
    }
    out << "}\n";
    return;
  }
  json doc;
  doc["format"] = "capnet-graph";
  doc["version"] = 1;
  doc["nodes"] = json::array();
  for (const auto& n : graph.nodes())
    doc["nodes"].push_back({{"id", n.id.str()}, {"name", n.name}, {"category", to_string(n.category)}});
  doc["edges"] = json::array();
  for (const auto& e : graph.edges()) {
    json je = {{"from", e.from.str()},
               {"to", e.to.str()},
               {"relation", to_string(e.relation.kind)},
               {"manufacturing", e.relation.manufacturing},
               {"origin", to_string(e.origin)}};
    je["correlation"] = e.correlation ? json(*e.correlation) : json(nullptr);
    doc["edges"].push_back(je);
  }
  out << doc.dump(2) << '\n';
}

ConjugationGraph import_graph(std::istream& in, std::string_view source_name) {
  ConjugationGraph g;
  try {
    const auto doc = json::parse(in);
    if (doc.value("format", "") != "capnet-graph")
      throw ParseError(fmt::format("{}: not a capnet graph document", source_name));
    for (const auto& n : doc.at("nodes")) {
      const auto cat = n.at("category").get<std::string>();
      if (cat != to_string(CapabilityCategory::upstream) && cat != to_string(CapabilityCategory::over_table))
        throw ParseError(fmt::format("{}: unknown category '{}'", source_name, cat));
      g.add_node({CapabilityId::parse(n.at("id").get<std::string>()), n.at("name").get<std::string>(),
                  cat == to_string(CapabilityCategory::upstream) ? CapabilityCategory::upstream : CapabilityCategory::over_table});
    }
    for (const auto& je : doc.at("edges")) {
      Edge e;
      e.from = CapabilityId::parse(je.at("from").get<std::string>());
      e.to = CapabilityId::parse(je.at("to").get<std::string>());
      e.relation = {parse_relation(je.at("relation").get<std::string>()), je.at("manufacturing").get<bool>()};
      if (!je.at("correlation").is_null()) e.correlation = je.at("correlation").get<double>();
      e.origin = je.at("origin").get<std::string>() == "augmented" ? EdgeOrigin::augmented
                                                                   : EdgeOrigin::interrelation;
      g.add_edge(e);
    }
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("{}: {}", source_name, e.what()));
  } catch (const InvariantError& e) {
    throw ParseError(fmt::format("{}: {}", source_name, e.what()));
  }
  if (const auto c = g.find_cycle()) throw CycleError(fmt::format("{}: graph has a cycle: {}", source_name, cycle_text(*c)));
  return g;
}

ConjugationGraph import_graph(const std::filesystem::path& path) {
  auto in = open_file(path);
  return import_graph(in, path.string());
}

}  // namespace capnet

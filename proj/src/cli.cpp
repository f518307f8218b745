#include "capnet/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "capnet/deltas.hpp"
#include "capnet/error.hpp"
#include "capnet/network.hpp"
#include "capnet/parallel.hpp"
#include "capnet/profiles.hpp"
#include "capnet/stats.hpp"
#include "capnet/synthesis.hpp"

#ifndef CAPNET_DATA_DIR
#define CAPNET_DATA_DIR "data"
#endif

namespace capnet::cli {

namespace fs = std::filesystem;

fs::path default_data_dir() { return CAPNET_DATA_DIR; }

namespace {

struct FixtureOptions {
  std::string data_dir = default_data_dir().string();
  std::string catalog;
  std::vector<std::string> interrelations;
  std::string correlations;
  std::string candidates;
  double threshold = 0.4;
  bool no_repair = false;

  fs::path resolve(const std::string& given, const char* fallback) const {
    return given.empty() ? fs::path(data_dir) / fallback : fs::path(given);
  }
  fs::path catalog_path() const { return resolve(catalog, "catalog.csv"); }
  std::vector<fs::path> interrelation_paths() const {
    if (!interrelations.empty()) return {interrelations.begin(), interrelations.end()};
    return {fs::path(data_dir) / "interrelations.csv", fs::path(data_dir) / "interrelations_supplement.csv"};
  }
};

void add_fixture_options(CLI::App& cmd, FixtureOptions& o, bool graph_flags) {
  cmd.add_option("--data-dir", o.data_dir, "Directory with the shipped fixtures");
  cmd.add_option("--catalog", o.catalog, "Capability catalog fixture");
  if (!graph_flags) return;
  cmd.add_option("--interrelations", o.interrelations, "Interrelation fixtures (repeatable)");
  cmd.add_option("--correlations", o.correlations, "Correlation matrix used for pruning");
  cmd.add_option("--candidates", o.candidates, "Strong-candidate fixture");
  cmd.add_option("--prune-threshold", o.threshold, "Prune edges with |r| below this")->check(CLI::Range(0.0, 2.0));
  cmd.add_flag("--no-repair", o.no_repair, "Skip the reachability repair edge");
}

ConjugationGraph default_graph(const FixtureOptions& o, PipelineReport* report) {
  const auto catalog = CapabilityCatalog::load(o.catalog_path());
  const auto table = InterrelationTable::load(o.interrelation_paths());
  const auto corr = read_matrix(o.resolve(o.correlations, "reference_correlations.csv"));
  const auto cands = StrongCandidateTable::load(o.resolve(o.candidates, "strong_candidates.csv"));
  return run_graph_pipeline(table, catalog, corr, cands, o.threshold, !o.no_repair, report);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot write '{}'", path));
  return f;
}

std::string edge_text(const Edge& e) {
  return fmt::format("{} -> {} ({})", e.from.str(), e.to.str(), to_string(e.relation.kind));
}

int cmd_build_graph(const FixtureOptions& fx, const std::string& out_json, const std::string& out_dot,
                    std::ostream& out) {
  PipelineReport rep;
  const auto g = default_graph(fx, &rep);
  out << fmt::format("nodes: {}\n", g.nodes().size());
  out << fmt::format("edges from interrelations: {} ({} symmetric edges dropped to avoid cycles)\n",
                     rep.built_edges, rep.build.dropped.size());
  for (const auto& e : rep.build.dropped) out << "  dropped " << edge_text(e) << '\n';
  out << fmt::format("{} edges pruned, {} edges added\n", rep.prune.removed.size(), rep.augment.added.size());
  for (const auto& e : rep.prune.removed) out << "  pruned " << edge_text(e) << '\n';
  for (const auto& e : rep.augment.added) out << "  added " << edge_text(e) << '\n';
  out << fmt::format("edges: {}\n", g.edges().size());
  if (!out_json.empty()) {
    auto f = open_out(out_json);
    export_graph(f, g, GraphFormat::json);
  }
  if (!out_dot.empty()) {
    auto f = open_out(out_dot);
    export_graph(f, g, GraphFormat::dot);
  }
  return ok;
}

struct SynthOptions {
  std::string graph;
  int n_min = 4;
  int p_max = 6;
  int p_hat_max = 7;
  std::string out_csv;
  std::string out_text;
};

int cmd_synthesize(const FixtureOptions& fx, const SynthOptions& o, std::ostream& out, std::ostream& err) {
  if (o.p_hat_max < o.p_max)
    throw ConfigError(fmt::format("--p-hat-max ({}) must not be below --p-max ({})", o.p_hat_max, o.p_max));
  const auto graph = o.graph.empty() ? default_graph(fx, nullptr) : import_graph(fs::path(o.graph));
  CoverProblem problem;
  problem.paths = enumerate_paths(graph, o.n_min);
  problem.p_max = o.p_max;
  problem.p_hat_max = o.p_hat_max;
  problem.node_set = synthesis_nodes(graph);
  out << fmt::format("candidate paths: {} (n_min {})\n", problem.paths.size(), o.n_min);
  CoverSolution sol;
  try {
    sol = solve_cover(problem);
  } catch (const CoverInfeasibleError& e) {
    err << e.what() << '\n';
    return infeasible;
  }
  std::vector<Path> chosen;
  for (auto w : sol.selected) chosen.push_back(problem.paths.paths[w]);
  const auto seqs = annotate_requirements(chosen, o.p_hat_max);
  out << fmt::format("sequences: {} (relaxation bound {:.3f}, visits in [{}, {}])\n", sol.objective, sol.lp_bound,
                     o.p_max, o.p_hat_max);
  const auto counts = visit_counts(problem, sol.selected);
  out << "visits:";
  for (std::size_t j = 0; j < counts.size(); ++j) out << fmt::format(" {}={}", problem.node_set[j].str(), counts[j]);
  out << '\n';
  write_sequences_text(out, seqs);
  for (const auto& w : lint_sequences(seqs)) out << "warning: " << w.message << '\n';
  if (!o.out_csv.empty()) {
    auto f = open_out(o.out_csv);
    write_sequences_csv(f, seqs);
  }
  if (!o.out_text.empty()) {
    auto f = open_out(o.out_text);
    write_sequences_text(f, seqs);
  }
  return ok;
}

struct AnalyzeOptions {
  std::string dataset;
  double threshold = 0.2;
  std::string phase = "post_rehab";
  std::vector<std::string> ids;
  bool main_level = false;
  std::int64_t resamples = 10000;
  std::uint64_t seed = 1;
  std::string out_corr;
  std::string out_p;
};

int cmd_analyze(const FixtureOptions& fx, const AnalyzeOptions& o, std::ostream& out) {
  const auto catalog = CapabilityCatalog::load(fx.catalog_path());
  const auto all = read_dataset(fs::path(o.dataset));
  all.validate_ids(catalog);
  const auto data = select_phase(all, o.phase == "all" ? std::nullopt : std::optional(parse_phase(o.phase)));
  std::vector<CapabilityId> ids;
  for (const auto& s : o.ids) ids.push_back(CapabilityId::parse(s));
  if (ids.empty()) ids = data.columns;
  const auto kept = filter_profiles(data, ids, o.threshold);
  out << fmt::format("retained {} of {} profiles (complete over {} capabilities, std >= {})\n",
                     kept.profiles.size(), data.profiles.size(), ids.size(), o.threshold);
  if (kept.profiles.size() < 2)
    throw MissingDataError(fmt::format("{} profiles left after filtering; need at least 2", kept.profiles.size()));

  ProfileDataset used = kept;
  std::vector<CapabilityId> matrix_ids = ids;
  for (auto& p : used.profiles) p = propagate_main_level(p, catalog);
  if (o.main_level) {
    matrix_ids.clear();
    for (const auto& id : ids)
      if (matrix_ids.empty() || matrix_ids.back() != id.main_level()) matrix_ids.push_back(id.main_level());
  }
  const auto columns = extract_columns(used, matrix_ids);
  const auto corr = correlation_matrix(columns, matrix_ids);
  const auto pvals = pvalue_matrix(columns, matrix_ids, o.resamples, o.seed);

  std::size_t undefined = 0, strong = 0, significant = 0;
  double p_max = 0.0;
  for (std::size_t i = 0; i < matrix_ids.size(); ++i) {
    for (std::size_t j = i + 1; j < matrix_ids.size(); ++j) {
      const auto r = corr.at(i, j);
      if (!r) {
        ++undefined;
        continue;
      }
      if (classify_correlation(*r) == CorrelationStrength::strong) ++strong;
      if (const auto p = pvals.at(i, j)) {
        p_max = std::max(p_max, *p);
        if (*p <= 0.05) ++significant;
      }
    }
  }
  const auto pairs = matrix_ids.size() * (matrix_ids.size() - 1) / 2;
  out << fmt::format("pairs: {} ({} undefined), strong: {}, p <= 0.05: {}, largest p: {:.4f} ({} resamples, seed {})\n",
                     pairs, undefined, strong, significant, p_max, o.resamples, o.seed);
  if (!o.out_corr.empty()) {
    auto f = open_out(o.out_corr);
    write_matrix(f, corr, "correlations");
  }
  if (!o.out_p.empty()) {
    auto f = open_out(o.out_p);
    write_matrix(f, pvals, "pvalues");
  }
  return ok;
}

struct AllocateOptions {
  std::string requirements;
  std::string profile;
  std::string agent;
  std::string graph;
  int xi = 0;
  std::vector<std::string> xi_for;
  int theta = 0;
  std::string out_json;
};

int cmd_allocate(const FixtureOptions& fx, const AllocateOptions& o, std::ostream& out) {
  const auto catalog = CapabilityCatalog::load(fx.catalog_path());
  const auto req = read_requirements(fs::path(o.requirements));
  for (const auto& [id, q] : req.requirements)
    if (!catalog.knows(id)) throw ParseError(fmt::format("requirement {} is not in the catalog", id.str()));
  const auto data = read_dataset(fs::path(o.profile));
  data.validate_ids(catalog);
  if (data.profiles.empty()) throw MissingDataError(fmt::format("'{}' holds no profiles", o.profile));
  const Profile* chosen = &data.profiles.front();
  if (!o.agent.empty()) {
    chosen = nullptr;
    for (const auto& p : data.profiles)
      if (p.agent_id == o.agent) chosen = &p;
    if (!chosen) throw MissingDataError(fmt::format("no profile for agent '{}'", o.agent));
  }
  const auto profile = propagate_main_level(*chosen, catalog);

  FuzzyParams fuzz;
  fuzz.default_xi = o.xi;
  fuzz.theta = o.theta;
  for (const auto& item : o.xi_for) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("--xi-for expects id=value, got '{}'", item));
    int v = 0;
    try {
      v = std::stoi(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("--xi-for value in '{}' is not an integer", item));
    }
    fuzz.xi[CapabilityId::parse(item.substr(0, eq))] = v;
  }
  fuzz.validate(req.requirements.size());

  const auto graph = o.graph.empty() ? default_graph(fx, nullptr) : import_graph(fs::path(o.graph));
  const auto trace = compensate(req, profile, graph, fuzz);
  out << fmt::format("action '{}', agent '{}'\n", req.action_id, profile.agent_id);
  write_trace_text(out, trace);
  if (!o.out_json.empty()) {
    auto f = open_out(o.out_json);
    f << trace_to_json(trace).dump(2) << '\n';
  }
  return trace.outcome == CompensationOutcome::infeasible ? infeasible : ok;
}

struct GenOptions {
  GeneratorConfig config;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_gen_data(const FixtureOptions& fx, GenOptions o, std::ostream& out) {
  const auto catalog = CapabilityCatalog::load(fx.catalog_path());
  for (const auto& e : catalog.entries())
    if (e.posture != Posture::standing) o.config.ids.push_back(e.id);
  const auto data = generate_synthetic_profiles(o.config, o.seed);
  auto f = open_out(o.out);
  write_dataset(f, data);
  out << fmt::format("wrote {} profiles over {} capabilities to {}\n", data.profiles.size(), data.columns.size(), o.out);
  return ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conjugated-capability networks: graph construction, statistics, test synthesis, allocation",
               "capnet"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);

  FixtureOptions fx;

  auto* build = app.add_subcommand("build-graph", "Build, prune and augment the conjugation graph");
  add_fixture_options(*build, fx, true);
  std::string out_json, out_dot;
  build->add_option("--out-json", out_json, "Structured graph output");
  build->add_option("--out-dot", out_dot, "Graphviz output");

  auto* synth = app.add_subcommand("synthesize", "Select and annotate movement sequences");
  add_fixture_options(*synth, fx, true);
  SynthOptions so;
  synth->add_option("--graph", so.graph, "Graph document from build-graph (default: build from fixtures)");
  synth->add_option("--n-min", so.n_min, "Minimum nodes per path")->check(CLI::Range(1, 1000));
  synth->add_option("--p-max", so.p_max, "Minimum visits per node")->check(CLI::Range(1, 1000));
  synth->add_option("--p-hat-max", so.p_hat_max, "Maximum visits per node")->check(CLI::Range(1, 1000));
  synth->add_option("--out", so.out_csv, "Sequence table (CSV)");
  synth->add_option("--out-text", so.out_text, "Shaded text rendering");

  auto* analyze = app.add_subcommand("analyze", "Filter profiles, correlate and test significance");
  add_fixture_options(*analyze, fx, false);
  AnalyzeOptions ao;
  analyze->add_option("--dataset", ao.dataset, "Profile dataset")->required();
  analyze->add_option("--threshold", ao.threshold, "Minimum profile standard deviation")
      ->check(CLI::NonNegativeNumber);
  analyze->add_option("--phase", ao.phase, "pre_rehab, post_rehab or all")
      ->check(CLI::IsMember({"pre_rehab", "post_rehab", "unspecified", "all"}));
  analyze->add_option("--ids", ao.ids, "Capabilities to evaluate (default: dataset columns)");
  analyze->add_flag("--main-level", ao.main_level, "Correlate main-level aggregates");
  analyze->add_option("--resamples", ao.resamples, "Permutation resamples")->check(CLI::Range(1, 100000000));
  analyze->add_option("--seed", ao.seed, "Random seed");
  analyze->add_option("--out-corr", ao.out_corr, "Correlation matrix output");
  analyze->add_option("--out-p", ao.out_p, "p-value matrix output");

  auto* alloc = app.add_subcommand("allocate", "Delta compensation for one agent and action");
  add_fixture_options(*alloc, fx, true);
  AllocateOptions lo;
  alloc->add_option("--requirements", lo.requirements, "Requirement set (capability_id,level)")->required();
  alloc->add_option("--profile", lo.profile, "Profile dataset")->required();
  alloc->add_option("--agent", lo.agent, "Agent id (default: first profile)");
  alloc->add_option("--graph", lo.graph, "Graph document (default: build from fixtures)");
  alloc->add_option("--xi", lo.xi, "Default per-capability slack")->check(CLI::Range(0, 6));
  alloc->add_option("--xi-for", lo.xi_for, "Per-capability slack, id=value (repeatable)");
  alloc->add_option("--theta", lo.theta, "Aggregate slack")->check(CLI::NonNegativeNumber);
  alloc->add_option("--out-json", lo.out_json, "Trace document");

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic profile dataset");
  add_fixture_options(*gen, fx, false);
  GenOptions go;
  gen->add_option("--count", go.config.count, "Agents with pre and post profiles")->check(CLI::NonNegativeNumber);
  gen->add_option("--extra-pre", go.config.extra_pre, "Agents with a pre profile only")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", go.seed, "Random seed");
  gen->add_option("--within-corr", go.config.within_main_correlation, "Within-main latent correlation")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--cross-share", go.config.cross_main_share, "Share of the general factor")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--degenerate", go.config.degenerate_fraction, "Fraction of constant or incomplete profiles")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--gain", go.config.rehab_gain, "Per-main probability of a rehab gain")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--out", go.out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }

  try {
    parallel::set_threads(threads);
    if (*build) return cmd_build_graph(fx, out_json, out_dot, out);
    if (*synth) return cmd_synthesize(fx, so, out, err);
    if (*analyze) return cmd_analyze(fx, ao, out);
    if (*alloc) return cmd_allocate(fx, lo, out);
    if (*gen) return cmd_gen_data(fx, go, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return infeasible;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return internal_error;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return internal_error;
  }
  return usage_error;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"capnet"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace capnet::cli

// Serial reference kernels against their OpenMP versions.
#include <random>

#include <benchmark/benchmark.h>

#include "capnet/network.hpp"
#include "capnet/stats.hpp"
#include "capnet/synthesis.hpp"
#include "capnet/taxonomy.hpp"

using namespace capnet;

namespace {

std::filesystem::path data(const char* name) { return std::filesystem::path(CAPNET_DATA_DIR) / name; }

struct Columns {
  std::vector<std::vector<double>> cols;
  std::vector<CapabilityId> ids;
};

Columns random_columns(std::size_t n_cols, std::size_t n_rows) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Columns c;
  for (std::size_t j = 0; j < n_cols; ++j) {
    c.ids.push_back(CapabilityId(3, 1 + static_cast<int>(j / 9), 1 + static_cast<int>(j % 9)));
    std::vector<double> col(n_rows);
    for (auto& v : col) v = nd(rng);
    c.cols.push_back(std::move(col));
  }
  return c;
}

const ConjugationGraph& reference_graph() {
  static const ConjugationGraph g = [] {
    const auto catalog = CapabilityCatalog::load(data("catalog.csv"));
    const auto table = InterrelationTable::load(
        std::vector<std::filesystem::path>{data("interrelations.csv"), data("interrelations_supplement.csv")});
    return run_graph_pipeline(table, catalog, read_matrix(data("reference_correlations.csv")),
                              StrongCandidateTable::load(data("strong_candidates.csv")), 0.4, true);
  }();
  return g;
}

void BM_CorrelationSerial(benchmark::State& state) {
  const auto c = random_columns(static_cast<std::size_t>(state.range(0)), 1040);
  for (auto _ : state) benchmark::DoNotOptimize(correlation_matrix_serial(c.cols, c.ids));
}

void BM_CorrelationParallel(benchmark::State& state) {
  const auto c = random_columns(static_cast<std::size_t>(state.range(0)), 1040);
  for (auto _ : state) benchmark::DoNotOptimize(correlation_matrix(c.cols, c.ids));
}

void BM_PermutationSerial(benchmark::State& state) {
  const auto c = random_columns(2, 476);
  for (auto _ : state) benchmark::DoNotOptimize(permutation_test_serial(c.cols[0], c.cols[1], state.range(0), 1));
}

void BM_PermutationParallel(benchmark::State& state) {
  const auto c = random_columns(2, 476);
  for (auto _ : state) benchmark::DoNotOptimize(permutation_test(c.cols[0], c.cols[1], state.range(0), 1));
}

void BM_PathsSerial(benchmark::State& state) {
  const auto& g = reference_graph();
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_paths_serial(g, static_cast<int>(state.range(0))));
}

void BM_PathsParallel(benchmark::State& state) {
  const auto& g = reference_graph();
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_paths(g, static_cast<int>(state.range(0))));
}

}  // namespace

BENCHMARK(BM_CorrelationSerial)->Arg(12)->Arg(33)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorrelationParallel)->Arg(12)->Arg(33)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PermutationSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PermutationParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PathsSerial)->Arg(1)->Arg(4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PathsParallel)->Arg(1)->Arg(4)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();

#include "capnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "capnet/csv.hpp"
#include "capnet/error.hpp"

namespace capnet {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw MissingDataError(fmt::format("vectors differ in length ({} vs {})", x.size(), y.size()));
  if (x.size() < 2) throw MissingDataError("correlation needs at least two samples");
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Centered and scaled to unit norm; empty if the input is constant.
std::vector<double> standardize(std::span<const double> v) {
  const double m = mean_of(v);
  std::vector<double> z(v.size());
  double ss = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    z[i] = v[i] - m;
    ss += z[i] * z[i];
  }
  if (ss == 0.0) return {};
  const double s = std::sqrt(ss);
  for (auto& e : z) e /= s;
  return z;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::uint64_t resample_seed(std::uint64_t seed, std::int64_t k) {
  return splitmix64(seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(k) + 1));
}

constexpr double kTieTolerance = 1e-12;

struct PreparedTest {
  std::vector<double> zx, zy;
  double observed_dot = 0.0;
};

PreparedTest prepare(std::span<const double> x, std::span<const double> y, std::int64_t n_resamples) {
  check_pair(x, y);
  if (n_resamples < 1) throw ConfigError("permutation test needs at least one resample");
  PreparedTest t{standardize(x), standardize(y)};
  if (t.zx.empty() || t.zy.empty()) throw UndefinedCorrelation("permutation test on a constant vector");
  t.observed_dot = dot(t.zx, t.zy);
  return t;
}

PermutationTestResult finish(std::span<const double> x, std::span<const double> y, std::int64_t b,
                             std::int64_t m, std::uint64_t seed) {
  PermutationTestResult r;
  r.statistic = pearson(x, y);
  r.exceedances = b;
  r.n_resamples = m;
  r.seed = seed;
  r.p_value = static_cast<double>(b + 1) / static_cast<double>(m + 1);
  return r;
}

CorrelationMatrix empty_matrix(const std::vector<CapabilityId>& ids, std::size_t n_samples) {
  CorrelationMatrix m;
  m.ids = ids;
  m.cells.assign(ids.size() * ids.size(), std::nullopt);
  m.n_samples = n_samples;
  return m;
}

std::vector<std::vector<double>> standardized_columns(const std::vector<std::vector<double>>& columns) {
  std::vector<std::vector<double>> z;
  z.reserve(columns.size());
  for (const auto& c : columns) z.push_back(standardize(c));
  return z;
}

void check_columns(const std::vector<std::vector<double>>& columns, const std::vector<CapabilityId>& ids) {
  if (columns.size() != ids.size()) throw InvariantError("column count differs from id count");
  const std::size_t n = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != n) throw MissingDataError("columns differ in length");
  if (n < 2) throw MissingDataError(fmt::format("correlation matrix needs at least 2 profiles, got {}", n));
}

std::optional<double> cell(const std::vector<std::vector<double>>& z, std::size_t i, std::size_t j) {
  if (z[i].empty() || z[j].empty()) return std::nullopt;
  return std::clamp(dot(z[i], z[j]), -1.0, 1.0);
}

void fill_diagonal(CorrelationMatrix& m, const std::vector<std::vector<double>>& z) {
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!z[i].empty()) m.at(i, i) = 1.0;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string_view to_string(CorrelationStrength s) {
  switch (s) {
    case CorrelationStrength::weak: return "weak";
    case CorrelationStrength::moderate: return "moderate";
    case CorrelationStrength::strong: return "strong";
  }
  return "weak";
}

std::optional<std::size_t> CorrelationMatrix::index_of(const CapabilityId& id) const {
  auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ids.begin());
}

std::optional<double> CorrelationMatrix::value(const CapabilityId& a, const CapabilityId& b) const {
  const auto i = index_of(a), j = index_of(b);
  if (!i || !j)
    throw MissingDataError(fmt::format("correlation matrix has no entry for {}", (!i ? a : b).str()));
  return at(*i, *j);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation("correlation of a constant vector is undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<std::vector<double>> extract_columns(const ProfileDataset& dataset,
                                                 const std::vector<CapabilityId>& ids) {
  std::vector<std::vector<double>> cols(ids.size());
  for (auto& c : cols) c.reserve(dataset.profiles.size());
  for (const auto& p : dataset.profiles) {
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const auto q = p.get(ids[j]);
      if (!q)
        throw MissingDataError(fmt::format("profile '{}' has no value for {}", p.agent_id, ids[j].str()));
      cols[j].push_back(q->value());
    }
  }
  return cols;
}

CorrelationMatrix correlation_matrix_serial(const std::vector<std::vector<double>>& columns,
                                            const std::vector<CapabilityId>& ids) {
  check_columns(columns, ids);
  auto m = empty_matrix(ids, columns.front().size());
  const auto z = standardized_columns(columns);
  fill_diagonal(m, z);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) m.at(i, j) = m.at(j, i) = cell(z, i, j);
  return m;
}

CorrelationMatrix correlation_matrix(const std::vector<std::vector<double>>& columns,
                                     const std::vector<CapabilityId>& ids) {
  check_columns(columns, ids);
  auto m = empty_matrix(ids, columns.front().size());
  const auto z = standardized_columns(columns);
  fill_diagonal(m, z);
  const auto n = static_cast<std::int64_t>(ids.size());
  const std::int64_t pairs = n * (n - 1) / 2;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t k = 0; k < pairs; ++k) {
    // row i holds n-1-i pairs
    std::int64_t i = 0, rest = k;
    while (rest >= n - 1 - i) {
      rest -= n - 1 - i;
      ++i;
    }
    const auto j = i + 1 + rest;
    const auto c = cell(z, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    m.at(i, j) = c;
    m.at(j, i) = c;
  }
  return m;
}

CorrelationMatrix correlation_matrix(const ProfileDataset& dataset, const std::vector<CapabilityId>& ids) {
  return correlation_matrix(extract_columns(dataset, ids), ids);
}

CorrelationMatrix correlation_matrix_serial(const ProfileDataset& dataset,
                                            const std::vector<CapabilityId>& ids) {
  return correlation_matrix_serial(extract_columns(dataset, ids), ids);
}

PermutationTestResult permutation_test_serial(std::span<const double> x, std::span<const double> y,
                                              std::int64_t n_resamples, std::uint64_t seed) {
  const auto t = prepare(x, y, n_resamples);
  const double threshold = std::abs(t.observed_dot) - kTieTolerance;
  std::vector<double> buf;
  std::int64_t b = 0;
  for (std::int64_t k = 0; k < n_resamples; ++k) {
    buf = t.zy;
    std::mt19937_64 rng(resample_seed(seed, k));
    std::shuffle(buf.begin(), buf.end(), rng);
    if (std::abs(dot(t.zx, buf)) >= threshold) ++b;
  }
  return finish(x, y, b, n_resamples, seed);
}

PermutationTestResult permutation_test(std::span<const double> x, std::span<const double> y,
                                       std::int64_t n_resamples, std::uint64_t seed) {
  const auto t = prepare(x, y, n_resamples);
  const double threshold = std::abs(t.observed_dot) - kTieTolerance;
  std::int64_t b = 0;
#pragma omp parallel reduction(+ : b)
  {
    std::vector<double> buf;
#pragma omp for schedule(static)
    for (std::int64_t k = 0; k < n_resamples; ++k) {
      buf = t.zy;
      std::mt19937_64 rng(resample_seed(seed, k));
      std::shuffle(buf.begin(), buf.end(), rng);
      if (std::abs(dot(t.zx, buf)) >= threshold) ++b;
    }
  }
  return finish(x, y, b, n_resamples, seed);
}

CorrelationMatrix pvalue_matrix(const std::vector<std::vector<double>>& columns,
                                const std::vector<CapabilityId>& ids, std::int64_t n_resamples,
                                std::uint64_t seed) {
  check_columns(columns, ids);
  auto m = empty_matrix(ids, columns.front().size());
  const auto n = ids.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto pair_seed = splitmix64(seed ^ splitmix64(i * n + j));
      try {
        const auto r = permutation_test(columns[i], columns[j], n_resamples, pair_seed);
        m.at(i, j) = m.at(j, i) = r.p_value;
      } catch (const UndefinedCorrelation&) {
      }
    }
  }
  return m;
}

CorrelationStrength classify_correlation(double r) {
  const double a = std::abs(r);
  if (a < 0.4) return CorrelationStrength::weak;
  if (a < 0.8) return CorrelationStrength::moderate;
  return CorrelationStrength::strong;
}

void write_matrix(std::ostream& out, const CorrelationMatrix& m, std::string_view tag) {
  out << "# capnet-" << tag << " v1\n";
  if (m.n_samples > 0) out << "# samples: " << m.n_samples << '\n';
  out << "id";
  for (const auto& id : m.ids) out << ',' << id.str();
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << m.ids[i].str();
    for (std::size_t j = 0; j < m.size(); ++j) {
      out << ',';
      if (const auto v = m.at(i, j)) out << fmt::format("{:.6f}", *v);
    }
    out << '\n';
  }
}

CorrelationMatrix read_matrix(std::istream& in, std::string_view source_name) {
  const auto doc = csv::parse(in, source_name);
  if (doc.header.empty() || doc.header[0] != "id")
    throw ParseError(fmt::format("{}: header must start with 'id'", source_name));
  CorrelationMatrix m;
  for (std::size_t c = 1; c < doc.header.size(); ++c) m.ids.push_back(CapabilityId::parse(doc.header[c]));
  const auto n = m.ids.size();
  if (doc.rows.size() != n)
    throw ParseError(fmt::format("{}: expected {} rows, found {}", source_name, n, doc.rows.size()));
  m.cells.assign(n * n, std::nullopt);
  for (const auto& c : doc.comments)
    if (c.rfind("# samples: ", 0) == 0) m.n_samples = std::stoul(c.substr(11));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = doc.rows[i];
    if (CapabilityId::parse(row[0]) != m.ids[i])
      throw ParseError(fmt::format("{}:{}: row id {} does not match column order", source_name,
                                   doc.lines[i], row[0]));
    for (std::size_t j = 0; j < n; ++j) {
      const auto& text = row[j + 1];
      if (text.empty()) continue;
      double v = 0.0;
      try {
        std::size_t pos = 0;
        v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError(fmt::format("{}:{}: '{}' is not a number", source_name, doc.lines[i], text));
      }
      if (std::abs(v) > 1.0)
        throw ParseError(fmt::format("{}:{}: correlation {} outside [-1, 1]", source_name, doc.lines[i], text));
      m.at(i, j) = v;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (m.at(i, j) != m.at(j, i))
        throw ParseError(fmt::format("{}: matrix is not symmetric at ({}, {})", source_name,
                                     m.ids[i].str(), m.ids[j].str()));
  return m;
}

CorrelationMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return read_matrix(in, path.string());
}

}  // namespace capnet

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "capnet/error.hpp"
#include "capnet/profiles.hpp"
#include "capnet/taxonomy.hpp"

namespace capnet {

/// Square symmetric matrix over `ids`. Cells involving a constant column
/// are undefined (nullopt).
struct CorrelationMatrix {
  std::vector<CapabilityId> ids;
  std::vector<std::optional<double>> cells;
  /// 0 when unknown (e.g. a transcribed reference matrix).
  std::size_t n_samples = 0;

  std::size_t size() const { return ids.size(); }
  std::optional<double> at(std::size_t i, std::size_t j) const { return cells[i * ids.size() + j]; }
  std::optional<double>& at(std::size_t i, std::size_t j) { return cells[i * ids.size() + j]; }
  std::optional<std::size_t> index_of(const CapabilityId& id) const;
  /// Cell for a pair of ids; throws MissingDataError if an id is absent.
  std::optional<double> value(const CapabilityId& a, const CapabilityId& b) const;

  friend bool operator==(const CorrelationMatrix&, const CorrelationMatrix&) = default;
};

struct PermutationTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::int64_t n_resamples = 0;
  std::uint64_t seed = 0;
  /// Resamples with |r| >= |observed|.
  std::int64_t exceedances = 0;

  friend bool operator==(const PermutationTestResult&, const PermutationTestResult&) = default;
};

enum class CorrelationStrength { weak, moderate, strong };
std::string_view to_string(CorrelationStrength s);

/// Product-moment correlation. Throws MissingDataError for unequal or short
/// inputs, UndefinedCorrelation for a constant input.
double pearson(std::span<const double> x, std::span<const double> y);

class UndefinedCorrelation : public MissingDataError {
 public:
  using MissingDataError::MissingDataError;
};

/// Columns of `dataset` over `ids` as dense vectors (one per id).
/// Throws MissingDataError if a profile lacks a value.
std::vector<std::vector<double>> extract_columns(const ProfileDataset& dataset,
                                                 const std::vector<CapabilityId>& ids);

/// OpenMP over pairs; same cells as the serial version bit for bit.
CorrelationMatrix correlation_matrix(const ProfileDataset& dataset, const std::vector<CapabilityId>& ids);
CorrelationMatrix correlation_matrix_serial(const ProfileDataset& dataset,
                                            const std::vector<CapabilityId>& ids);
CorrelationMatrix correlation_matrix(const std::vector<std::vector<double>>& columns,
                                     const std::vector<CapabilityId>& ids);
CorrelationMatrix correlation_matrix_serial(const std::vector<std::vector<double>>& columns,
                                            const std::vector<CapabilityId>& ids);

/// Two-sided test on |r|; p = (b + 1) / (m + 1). Resample k shuffles y with
/// a generator seeded from (seed, k), so results do not depend on threads.
PermutationTestResult permutation_test(std::span<const double> x, std::span<const double> y,
                                       std::int64_t n_resamples, std::uint64_t seed);
PermutationTestResult permutation_test_serial(std::span<const double> x, std::span<const double> y,
                                              std::int64_t n_resamples, std::uint64_t seed);

/// p-values for every pair of columns; pair (i, j) uses a seed derived from
/// (seed, i, j). Undefined where the correlation is undefined; diagonal unset.
CorrelationMatrix pvalue_matrix(const std::vector<std::vector<double>>& columns,
                                const std::vector<CapabilityId>& ids, std::int64_t n_resamples,
                                std::uint64_t seed);

CorrelationStrength classify_correlation(double r);

std::uint64_t splitmix64(std::uint64_t x);

/// Header "id,<ids>", one row per id; empty cell = undefined.
void write_matrix(std::ostream& out, const CorrelationMatrix& m, std::string_view tag = "correlations");
CorrelationMatrix read_matrix(std::istream& in, std::string_view source_name = "<matrix>");
CorrelationMatrix read_matrix(const std::filesystem::path& path);

}  // namespace capnet

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "patchforge/manifest.hpp"
#include "patchforge/metric_kind.hpp"

namespace patchforge {

enum class HistogramScale { linear, log10_value };

// Equal-width bins; right-closed convention ((lo, hi], first bin closed on
// both ends) so the maximum always lands in the last bin. In log scale the
// edges live in the log10 domain and non-positive values count as underflow.
struct Histogram {
  std::vector<double> edges;            // B+1, strictly ascending
  std::vector<std::uint64_t> counts;    // B
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;
  HistogramScale scale = HistogramScale::linear;
  bool sqrt_transform = false;
};

struct HistogramOptions {
  int bins = 100;
  HistogramScale scale = HistogramScale::linear;
  bool sqrt_transform = false;  // bin sqrt(value) instead of value
  std::optional<std::pair<double, double>> range;  // in the binned domain
};

// Throws DataError on empty input (or log scale with no positive values and
// no explicit range), ConfigError for bins < 1.
Histogram histogram(const std::vector<double>& values, const HistogramOptions& options);

// Sample Pearson correlation, clamped to [-1, 1] against roundoff. Throws
// DimensionError on length mismatch or n < 2, DataError for constant input.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

struct CorrelationMatrix {
  std::vector<MetricKind> metrics;
  std::vector<double> rho;  // row-major metrics.size()^2, unit diagonal

  double at(std::size_t i, std::size_t j) const { return rho[i * metrics.size() + j]; }
};

// Symmetric with unit diagonal. Requires every listed metric on every record.
CorrelationMatrix metric_correlation_matrix(const Manifest& manifest,
                                            const std::vector<MetricKind>& metrics);

struct SummaryStats {
  std::uint64_t count = 0;
  double mean = 0, stddev = 0;  // population divisor
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

SummaryStats summarize(std::vector<double> values);  // throws DataError when empty
SummaryStats summary(const Manifest& manifest, MetricKind metric);

std::vector<double> metric_column(const Manifest& manifest, MetricKind metric);

void write_histogram_csv(const Histogram& hist, const std::filesystem::path& path);
void write_histogram_svg(const Histogram& hist, const std::filesystem::path& path);
void write_correlation_csv(const CorrelationMatrix& matrix, const std::filesystem::path& path);
void write_summary_csv(const SummaryStats& stats, const std::filesystem::path& path);

}  // namespace patchforge

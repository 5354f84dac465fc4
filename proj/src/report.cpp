#include "patchforge/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "patchforge/error.hpp"
#include "patchforge/util.hpp"

namespace patchforge {

Histogram histogram(const std::vector<double>& values, const HistogramOptions& options) {
  if (options.bins < 1) throw ConfigError("histogram needs bins >= 1");
  if (values.empty()) throw DataError("histogram of empty data");

  Histogram hist;
  hist.scale = options.scale;
  hist.sqrt_transform = options.sqrt_transform;

  std::vector<double> transformed;
  transformed.reserve(values.size());
  for (double v : values) {
    if (options.sqrt_transform) {
      if (v < 0) throw DataError("sqrt transform needs non-negative values");
      v = std::sqrt(v);
    }
    if (options.scale == HistogramScale::log10_value) {
      if (v <= 0.0) {
        ++hist.underflow;  // exact zeros (flat patches) land here, not at -inf
        continue;
      }
      v = std::log10(v);
    }
    transformed.push_back(v);
  }

  double lo, hi;
  if (options.range) {
    lo = options.range->first;
    hi = options.range->second;
    if (!(lo < hi)) throw ConfigError("histogram range must have lo < hi");
  } else {
    if (transformed.empty())
      throw DataError("log-scale histogram has no positive values and no explicit range");
    auto [min_it, max_it] = std::minmax_element(transformed.begin(), transformed.end());
    lo = *min_it;
    hi = *max_it;
    if (lo == hi) {  // constant data: widen so edges stay strictly ascending
      lo -= 0.5;
      hi += 0.5;
    }
  }

  const int bins = options.bins;
  hist.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i)
    hist.edges[i] = lo + (hi - lo) * (static_cast<double>(i) / bins);
  hist.edges[0] = lo;
  hist.edges[bins] = hi;
  hist.counts.assign(bins, 0);

  for (double v : transformed) {
    if (v < lo) { ++hist.underflow; continue; }
    if (v > hi) { ++hist.overflow; continue; }
    // Right-closed bins: first edge >= v among edges[1..] marks the bin.
    auto it = std::lower_bound(hist.edges.begin() + 1, hist.edges.end(), v);
    std::size_t bin = static_cast<std::size_t>(it - (hist.edges.begin() + 1));
    if (bin >= hist.counts.size()) bin = hist.counts.size() - 1;
    ++hist.counts[bin];
  }
  return hist;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw DimensionError("pearson needs equal lengths, got " + std::to_string(a.size()) +
                         " and " + std::to_string(b.size()));
  const std::size_t n = a.size();
  if (n < 2) throw DimensionError("pearson needs at least 2 samples");

  double mean_a = 0, mean_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);

  double cov = 0, var_a = 0, var_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double da = a[i] - mean_a;
    double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0)
    throw DataError("correlation is undefined for a constant vector");
  double rho = cov / std::sqrt(var_a * var_b);
  return std::clamp(rho, -1.0, 1.0);
}

std::vector<double> metric_column(const Manifest& manifest, MetricKind metric) {
  std::vector<double> column;
  column.reserve(manifest.records.size());
  std::size_t missing = 0;
  for (const auto& rec : manifest.records) {
    if (!rec.has_score(metric)) { ++missing; continue; }
    column.push_back(rec.score(metric));
  }
  if (missing > 0)
    throw ScoringGapError(std::to_string(missing) + " records lack metric '" +
                          metric_name(metric) + "' (run score first)");
  return column;
}

CorrelationMatrix metric_correlation_matrix(const Manifest& manifest,
                                            const std::vector<MetricKind>& metrics) {
  if (metrics.empty()) throw ConfigError("correlation needs at least one metric");
  CorrelationMatrix matrix;
  matrix.metrics = metrics;
  const std::size_t m = metrics.size();
  matrix.rho.assign(m * m, 1.0);

  std::vector<std::vector<double>> columns;
  columns.reserve(m);
  for (MetricKind kind : metrics) columns.push_back(metric_column(manifest, kind));

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      double rho = pearson(columns[i], columns[j]);
      matrix.rho[i * m + j] = rho;
      matrix.rho[j * m + i] = rho;
    }
  }
  return matrix;
}

SummaryStats summarize(std::vector<double> values) {
  if (values.empty()) throw DataError("summary of empty data");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();

  SummaryStats stats;
  stats.count = n;
  double mean = 0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  stats.mean = mean;
  stats.stddev = std::sqrt(var / static_cast<double>(n));
  stats.min = values.front();
  stats.max = values.back();

  auto quantile = [&](double p) {
    double h = p * static_cast<double>(n - 1);
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return values[n - 1];
    double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
  };
  stats.q1 = quantile(0.25);
  stats.median = quantile(0.5);
  stats.q3 = quantile(0.75);
  return stats;
}

SummaryStats summary(const Manifest& manifest, MetricKind metric) {
  return summarize(metric_column(manifest, metric));
}

void write_histogram_csv(const Histogram& hist, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "bin,lo,hi,count\r\n";
  out << "underflow,,," << hist.underflow << "\r\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    out << i << "," << format_double(hist.edges[i]) << "," << format_double(hist.edges[i + 1])
        << "," << hist.counts[i] << "\r\n";
  out << "overflow,,," << hist.overflow << "\r\n";
  if (!out) throw IoError("short write on '" + path.string() + "'");
}

void write_histogram_svg(const Histogram& hist, const std::filesystem::path& path) {
  const int width = 640, height = 400, margin = 40;
  std::uint64_t peak = 1;
  for (auto c : hist.counts) peak = std::max(peak, c);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const double plot_w = width - 2.0 * margin;
  const double plot_h = height - 2.0 * margin;
  const std::size_t bins = hist.counts.size();
  for (std::size_t i = 0; i < bins; ++i) {
    double bar_h = plot_h * static_cast<double>(hist.counts[i]) / static_cast<double>(peak);
    double x = margin + plot_w * static_cast<double>(i) / static_cast<double>(bins);
    double bar_w = plot_w / static_cast<double>(bins);
    svg << "<rect x=\"" << format_double(x) << "\" y=\"" << format_double(margin + plot_h - bar_h)
        << "\" width=\"" << format_double(bar_w * 0.95) << "\" height=\"" << format_double(bar_h)
        << "\" fill=\"steelblue\"/>\n";
  }
  svg << "<line x1=\"" << margin << "\" y1=\"" << (height - margin) << "\" x2=\""
      << (width - margin) << "\" y2=\"" << (height - margin) << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << margin << "\" y=\"" << (height - margin + 16) << "\" font-size=\"12\">"
      << format_double(hist.edges.front()) << "</text>\n";
  svg << "<text x=\"" << (width - margin - 40) << "\" y=\"" << (height - margin + 16)
      << "\" font-size=\"12\">" << format_double(hist.edges.back()) << "</text>\n";
  svg << "<text x=\"" << margin << "\" y=\"" << (margin - 8) << "\" font-size=\"12\">max count "
      << peak << "</text>\n";
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << svg.str();
  if (!out) throw IoError("short write on '" + path.string() + "'");
}

void write_correlation_csv(const CorrelationMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "metric";
  for (MetricKind kind : matrix.metrics) out << "," << metric_name(kind);
  out << "\r\n";
  for (std::size_t i = 0; i < matrix.metrics.size(); ++i) {
    out << metric_name(matrix.metrics[i]);
    for (std::size_t j = 0; j < matrix.metrics.size(); ++j)
      out << "," << format_double(matrix.at(i, j));
    out << "\r\n";
  }
  if (!out) throw IoError("short write on '" + path.string() + "'");
}

void write_summary_csv(const SummaryStats& stats, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "count,mean,std,min,q1,median,q3,max\r\n";
  out << stats.count << "," << format_double(stats.mean) << "," << format_double(stats.stddev)
      << "," << format_double(stats.min) << "," << format_double(stats.q1) << ","
      << format_double(stats.median) << "," << format_double(stats.q3) << ","
      << format_double(stats.max) << "\r\n";
  if (!out) throw IoError("short write on '" + path.string() + "'");
}

}  // namespace patchforge

#include "patchforge/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>

#include <fftw3.h>

#include "patchforge/error.hpp"
#include "patchforge/image_io.hpp"
#include "patchforge/log.hpp"
#include "patchforge/parallel.hpp"
#include "patchforge/patch_source.hpp"
#include "patchforge/util.hpp"

namespace patchforge {

double grad_metric(const Patch& patch) {
  const int n = patch.size;
  const int channels = patch.channels;
  double sum = 0.0;
  for (int c = 0; c < channels; ++c) {
    for (int h = 0; h < n; ++h) {
      int h_next = (h + 1 == n) ? 0 : h + 1;
      for (int w = 0; w < n; ++w) {
        int w_next = (w + 1 == n) ? 0 : w + 1;
        double v = patch.at(h, w, c);
        double dh = patch.at(h_next, w, c) - v;
        double dw = patch.at(h, w_next, c) - v;
        sum += dh * dh + dw * dw;
      }
    }
  }
  return sum / (static_cast<double>(n) * n * channels);
}

double std_metric(const Patch& patch) {
  const std::size_t count = patch.pixels.size();
  if (count == 0) return 0.0;
  double mean = 0.0;
  for (double v : patch.pixels) mean += v;
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (double v : patch.pixels) {
    double d = v - mean;
    var += d * d;
  }
  return std::sqrt(var / static_cast<double>(count));
}

namespace {

// Per-thread forward c2c plans keyed by transform size. The FFTW planner is
// not thread-safe, so planning is serialized; execution runs on the thread's
// own buffers.
class DftPlan {
 public:
  DftPlan(int rows, int cols) : rows_(rows), cols_(cols) {
    std::size_t count = static_cast<std::size_t>(rows) * cols;
    in_ = fftw_alloc_complex(count);
    out_ = fftw_alloc_complex(count);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_2d(rows, cols, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
  }

  ~DftPlan() {
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }

  DftPlan(const DftPlan&) = delete;
  DftPlan& operator=(const DftPlan&) = delete;

  fftw_complex* in() { return in_; }
  const fftw_complex* execute() {
    fftw_execute(plan_);
    return out_;
  }

  static std::mutex& planner_mutex() {
    static std::mutex mu;
    return mu;
  }

 private:
  int rows_, cols_;
  fftw_complex* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

DftPlan& plan_for(int rows, int cols) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<DftPlan>> cache;
  auto& slot = cache[{rows, cols}];
  if (!slot) slot = std::make_unique<DftPlan>(rows, cols);
  return *slot;
}

// |2*pi*k/N folded into (-pi, pi]| >= pi/2  <=>  4*min(k, N-k) >= N.
inline bool in_high_band(int k, int n) {
  int folded = std::min(k, n - k);
  return 4 * folded >= n;
}

}  // namespace

double freq_metric(const Patch& patch) {
  const int n = patch.size;
  const int channels = patch.channels;
  DftPlan& plan = plan_for(n, n);

  double total = 0.0;
  for (int c = 0; c < channels; ++c) {
    fftw_complex* in = plan.in();
    for (int h = 0; h < n; ++h) {
      for (int w = 0; w < n; ++w) {
        std::size_t i = static_cast<std::size_t>(h) * n + w;
        in[i][0] = patch.at(h, w, c);
        in[i][1] = 0.0;
      }
    }
    const fftw_complex* spectrum = plan.execute();
    for (int kh = 0; kh < n; ++kh) {
      if (!in_high_band(kh, n)) continue;
      for (int kw = 0; kw < n; ++kw) {
        if (!in_high_band(kw, n)) continue;
        std::size_t i = static_cast<std::size_t>(kh) * n + kw;
        total += spectrum[i][0] * spectrum[i][0] + spectrum[i][1] * spectrum[i][1];
      }
    }
  }
  return total / (static_cast<double>(n) * n * channels);
}

namespace {

double mse_over(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

double psnr_from_mse(double mse, double peak) {
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace

double mse_loss(const Patch& clean, const Patch& restored) {
  if (clean.size != restored.size || clean.channels != restored.channels)
    throw DimensionError("patch shape mismatch: " + std::to_string(clean.size) + "^2x" +
                         std::to_string(clean.channels) + " vs " +
                         std::to_string(restored.size) + "^2x" +
                         std::to_string(restored.channels));
  return mse_over(clean.pixels, restored.pixels);
}

double psnr(const Patch& a, const Patch& b, double peak) {
  return psnr_from_mse(mse_loss(a, b), peak);
}

double psnr(const Image& a, const Image& b, double peak) {
  if (a.height != b.height || a.width != b.width || a.channels != b.channels)
    throw DimensionError("image shape mismatch: " + std::to_string(a.width) + "x" +
                         std::to_string(a.height) + "x" + std::to_string(a.channels) + " vs " +
                         std::to_string(b.width) + "x" + std::to_string(b.height) + "x" +
                         std::to_string(b.channels));
  return psnr_from_mse(mse_over(a.pixels, b.pixels), peak);
}

namespace {

std::map<std::string, double> read_loss_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read loss CSV '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, double> losses;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "patch_id,loss")
        throw ParseError("loss CSV '" + path.string() + "' line 1: expected header 'patch_id,loss'");
      continue;
    }
    std::size_t comma = line.rfind(',');
    if (comma == std::string::npos)
      throw ParseError("loss CSV '" + path.string() + "' line " + std::to_string(line_no) +
                       ": expected 'patch_id,loss'");
    std::string id = line.substr(0, comma);
    double value;
    try {
      value = parse_double(line.substr(comma + 1));
    } catch (const ParseError&) {
      throw ParseError("loss CSV '" + path.string() + "' line " + std::to_string(line_no) +
                       ": loss is not a number");
    }
    losses[id] = value;
  }
  return losses;
}

std::string join_ids(const std::vector<std::string>& ids, std::size_t cap = 20) {
  std::ostringstream out;
  for (std::size_t i = 0; i < ids.size() && i < cap; ++i) out << (i ? ", " : "") << ids[i];
  if (ids.size() > cap) out << ", ... +" << (ids.size() - cap) << " more";
  return out.str();
}

}  // namespace

Manifest score_manifest(const Manifest& manifest, const ScoreOptions& options) {
  const bool want_loss = options.metrics.count(MetricKind::loss) != 0;
  if (want_loss && !options.loss.configured())
    throw ConfigError("metric 'loss' needs --restored-dir or --loss-csv");
  if (want_loss && !options.loss.restored_dir.empty() && !options.loss.csv_path.empty())
    throw ConfigError("--restored-dir and --loss-csv are mutually exclusive");

  Manifest out = manifest;
  const std::size_t n = out.records.size();

  const bool pixel_metrics = options.metrics.count(MetricKind::grad) ||
                             options.metrics.count(MetricKind::stddev) ||
                             options.metrics.count(MetricKind::freq);
  const bool restored_loss = want_loss && !options.loss.restored_dir.empty();

  std::vector<std::optional<std::string>> loss_failures(n);
  if (pixel_metrics || restored_loss) {
    PatchSource source(out.provenance, options.patches_override, options.images_override);
    auto missing = source.for_each(out, options.workers, [&](std::size_t i, const Patch& patch) {
      PatchRecord& rec = out.records[i];
      if (options.metrics.count(MetricKind::grad)) rec.scores[MetricKind::grad] = grad_metric(patch);
      if (options.metrics.count(MetricKind::stddev)) rec.scores[MetricKind::stddev] = std_metric(patch);
      if (options.metrics.count(MetricKind::freq)) rec.scores[MetricKind::freq] = freq_metric(patch);
      if (restored_loss) {
        std::filesystem::path file = options.loss.restored_dir / (rec.patch_id + ".png");
        std::error_code ec;
        if (!std::filesystem::exists(file, ec) || ec) {
          loss_failures[i] = rec.patch_id;
          return;
        }
        Image img = load_image(file);
        Patch restored = Patch::allocate(rec.source_id, rec.x, rec.y, img.height, img.channels);
        restored.pixels = std::move(img.pixels);
        rec.scores[MetricKind::loss] = mse_loss(patch, restored);
      }
    });
    if (!missing.empty())
      throw InputError("cannot resolve pixels for " + std::to_string(missing.size()) +
                       " records: " + join_ids(missing));
  }

  if (want_loss && !options.loss.csv_path.empty()) {
    auto losses = read_loss_csv(options.loss.csv_path);
    std::size_t matched = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto it = losses.find(out.records[i].patch_id);
      if (it == losses.end()) {
        loss_failures[i] = out.records[i].patch_id;
      } else {
        out.records[i].scores[MetricKind::loss] = it->second;
        ++matched;
      }
    }
    if (matched < losses.size()) {
      std::set<std::string> manifest_ids;
      for (const auto& rec : out.records) manifest_ids.insert(rec.patch_id);
      std::vector<std::string> unmatched;
      for (const auto& [id, value] : losses)
        if (!manifest_ids.count(id)) unmatched.push_back(id);
      std::string note = "loss sidecar has " + std::to_string(unmatched.size()) +
                         " ids not in the manifest: " + join_ids(unmatched);
      out.provenance.warnings.push_back(note);
      log::warn(note);
    }
  }

  std::vector<std::string> flagged;
  for (std::size_t i = 0; i < n; ++i) {
    if (loss_failures[i]) {
      out.records[i].extras["loss_missing"] = true;
      flagged.push_back(*loss_failures[i]);
    }
  }
  if (!flagged.empty()) {
    std::string note = "no loss value for " + std::to_string(flagged.size()) +
                       " records (flagged loss_missing): " + join_ids(flagged);
    out.provenance.warnings.push_back(note);
    log::warn(note);
  }

  std::string names;
  for (MetricKind kind : options.metrics) names += std::string(names.empty() ? "" : ",") + metric_name(kind);
  out.provenance.stages.push_back("score(" + names + ")");
  return out;
}

}  // namespace patchforge

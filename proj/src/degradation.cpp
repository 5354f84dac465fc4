#include "patchforge/degradation.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "patchforge/error.hpp"
#include "patchforge/image_io.hpp"
#include "patchforge/log.hpp"
#include "patchforge/rng.hpp"
#include "patchforge/util.hpp"

namespace patchforge {

double bicubic_kernel(double x) {
  x = std::abs(x);
  if (x <= 1.0) return (1.5 * x - 2.5) * x * x + 1.0;
  if (x < 2.0) return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
  return 0.0;
}

int reflect_index(int index, int n) {
  while (index < 0 || index >= n) {
    if (index < 0) index = -1 - index;
    else index = 2 * n - 1 - index;
  }
  return index;
}

namespace {

struct Tap {
  int index;      // already reflected into range
  double weight;  // unnormalized
};

struct OutputPixelTaps {
  std::vector<Tap> taps;
  double weight_sum = 0.0;
};

// Contribution windows for one axis. Downscaling widens the kernel support
// by the scale factor (antialiasing); normalization happens at apply time by
// dividing the weighted sum by the weight sum, which keeps constants exact
// for power-of-two pixel values.
std::vector<OutputPixelTaps> axis_taps(int in_len, int scale) {
  const int out_len = in_len / scale;
  const double kernel_scale = 1.0 / scale;
  const double support = 2.0 * scale;              // half-width of the widened kernel
  const int tap_count = 4 * scale + 2;

  std::vector<OutputPixelTaps> all(out_len);
  for (int i = 0; i < out_len; ++i) {
    const double center = (i + 0.5) * scale - 0.5;  // source coordinate of output sample
    const int left = static_cast<int>(std::floor(center - support));
    OutputPixelTaps& out = all[i];
    out.taps.reserve(tap_count);
    for (int t = 0; t < tap_count; ++t) {
      int idx = left + t;
      double w = kernel_scale * bicubic_kernel(kernel_scale * (center - idx));
      if (w == 0.0) continue;
      out.taps.push_back({reflect_index(idx, in_len), w});
      out.weight_sum += w;
    }
  }
  return all;
}

// Separable resample of an interleaved [h][w][c] buffer.
std::vector<double> resample(const std::vector<double>& src, int height, int width, int channels,
                             int scale) {
  const int out_w = width / scale;
  const int out_h = height / scale;
  const auto x_taps = axis_taps(width, scale);
  const auto y_taps = axis_taps(height, scale);

  // Pass 1: columns (x axis).
  std::vector<double> mid(static_cast<std::size_t>(height) * out_w * channels);
  for (int y = 0; y < height; ++y) {
    const double* row = &src[static_cast<std::size_t>(y) * width * channels];
    double* out_row = &mid[static_cast<std::size_t>(y) * out_w * channels];
    for (int x = 0; x < out_w; ++x) {
      const OutputPixelTaps& taps = x_taps[x];
      for (int c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (const Tap& tap : taps.taps)
          acc += tap.weight * row[static_cast<std::size_t>(tap.index) * channels + c];
        out_row[static_cast<std::size_t>(x) * channels + c] = acc / taps.weight_sum;
      }
    }
  }

  // Pass 2: rows (y axis), then clamp once at the end.
  std::vector<double> out(static_cast<std::size_t>(out_h) * out_w * channels);
  for (int y = 0; y < out_h; ++y) {
    const OutputPixelTaps& taps = y_taps[y];
    double* out_row = &out[static_cast<std::size_t>(y) * out_w * channels];
    for (int x = 0; x < out_w; ++x) {
      for (int c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (const Tap& tap : taps.taps)
          acc += tap.weight *
                 mid[(static_cast<std::size_t>(tap.index) * out_w + x) * channels + c];
        double v = acc / taps.weight_sum;
        if (v < 0.0) v = 0.0;
        if (v > 255.0) v = 255.0;
        out_row[static_cast<std::size_t>(x) * channels + c] = v;
      }
    }
  }
  return out;
}

void check_divisible(int height, int width, int scale, const std::string& what) {
  if (scale < 2)
    throw ConfigError("downsampling scale must be >= 2, got " + std::to_string(scale));
  if (height % scale != 0 || width % scale != 0)
    throw DimensionError(what + " dims " + std::to_string(width) + "x" + std::to_string(height) +
                         " are not divisible by scale " + std::to_string(scale));
}

}  // namespace

Image bicubic_downsample(const Image& image, int scale) {
  check_divisible(image.height, image.width, scale, "image '" + image.id + "'");
  Image out = Image::allocate(image.id, image.height / scale, image.width / scale, image.channels);
  out.pixels = resample(image.pixels, image.height, image.width, image.channels, scale);
  return out;
}

Patch bicubic_downsample(const Patch& patch, int scale) {
  check_divisible(patch.size, patch.size, scale, "patch");
  Patch out = Patch::allocate(patch.source_id, patch.x / scale, patch.y / scale,
                              patch.size / scale, patch.channels);
  out.pixels = resample(patch.pixels, patch.size, patch.size, patch.channels, scale);
  return out;
}

namespace {

void add_noise(std::vector<double>& pixels, double sigma, GaussianRng& rng, bool clip) {
  if (sigma == 0.0 && !clip) return;
  for (double& v : pixels) {
    if (sigma != 0.0) v += rng.next(sigma);
    if (clip) {
      if (v < 0.0) v = 0.0;
      if (v > 255.0) v = 255.0;
    }
  }
}

}  // namespace

Image awgn(const Image& image, double sigma, std::uint64_t seed, bool clip) {
  if (sigma < 0) throw ConfigError("awgn sigma must be >= 0");
  Image out = image;
  GaussianRng rng(seed);
  add_noise(out.pixels, sigma, rng, clip);
  return out;
}

Patch awgn(const Patch& patch, double sigma, std::uint64_t seed, bool clip) {
  if (sigma < 0) throw ConfigError("awgn sigma must be >= 0");
  Patch out = patch;
  GaussianRng rng(seed);
  add_noise(out.pixels, sigma, rng, clip);
  return out;
}

namespace {

std::uint64_t global_seed_of(const DegradationSpec& spec) {
  if (spec.model == DegradationSpec::Model::awgn) return spec.seed;
  if (spec.model == DegradationSpec::Model::compose)
    for (const auto& step : spec.steps)
      if (step.model == DegradationSpec::Model::awgn) return step.seed;
  return 0;
}

Patch apply_spec(Patch patch, const DegradationSpec& spec, GaussianRng& rng) {
  switch (spec.model) {
    case DegradationSpec::Model::bicubic_down:
      return bicubic_downsample(patch, spec.scale);
    case DegradationSpec::Model::awgn:
      add_noise(patch.pixels, spec.sigma, rng, spec.clip);
      return patch;
    case DegradationSpec::Model::compose:
      for (const auto& step : spec.steps) patch = apply_spec(std::move(patch), step, rng);
      return patch;
  }
  return patch;
}

std::string spec_descriptor(const DegradationSpec& spec) {
  switch (spec.model) {
    case DegradationSpec::Model::bicubic_down:
      return "bicubic x" + std::to_string(spec.scale);
    case DegradationSpec::Model::awgn:
      return "awgn sigma=" + format_double(spec.sigma);
    case DegradationSpec::Model::compose: {
      std::string out;
      for (const auto& step : spec.steps)
        out += (out.empty() ? "" : " + ") + spec_descriptor(step);
      return out;
    }
  }
  return "?";
}

}  // namespace

Manifest degrade_manifest(const Manifest& manifest, const DegradeOptions& options) {
  validate(options.spec);
  if (options.out_dir.empty()) throw ConfigError("degrade needs an output directory");
  std::filesystem::create_directories(options.out_dir);

  Manifest out = manifest;
  const std::uint64_t global_seed = global_seed_of(options.spec);

  PatchSource source(out.provenance, options.patches_override, options.images_override);
  auto missing = source.for_each(out, options.workers, [&](std::size_t i, const Patch& patch) {
    PatchRecord& rec = out.records[i];
    const std::uint64_t record_seed = global_seed ^ fnv1a64(rec.patch_id);
    GaussianRng rng(record_seed);
    Patch degraded = apply_spec(patch, options.spec, rng);
    if (options.raw)
      write_pft1(degraded, options.out_dir / (rec.patch_id + ".pft"));
    else
      save_png(degraded, options.out_dir / (rec.patch_id + ".png"));
    rec.degradation = DegradationProvenance{options.spec, record_seed};
  });
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "missing HR patch data for " << missing.size() << " records: ";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i)
      msg << (i ? ", " : "") << missing[i];
    if (missing.size() > 20) msg << ", ... +" << (missing.size() - 20) << " more";
    throw InputError(msg.str());
  }

  out.provenance.degraded_dir =
      std::filesystem::absolute(options.out_dir).lexically_normal().string();
  out.provenance.stages.push_back("degrade(" + spec_descriptor(options.spec) + ")");
  log::info("degraded " + std::to_string(out.records.size()) + " patches [" +
            spec_descriptor(options.spec) + "]");
  return out;
}

}  // namespace patchforge

#pragma once

#include <cstdint>
#include <filesystem>

#include "patchforge/degradation_spec.hpp"
#include "patchforge/image.hpp"
#include "patchforge/manifest.hpp"
#include "patchforge/patch_source.hpp"

namespace patchforge {

// Cubic convolution kernel, a = -0.5.
double bicubic_kernel(double x);

// Symmetric (half-sample) boundary reflection into [0, n).
int reflect_index(int index, int n);

// Downscale by an integer factor with the cubic kernel, antialiasing enabled
// (kernel support widened by the factor, weights renormalized), symmetric
// boundary handling. Output clamped to [0, 255]. Both spatial dims must be
// divisible by the factor; throws DimensionError otherwise.
Image bicubic_downsample(const Image& image, int scale);
// Patch variant propagates HR coordinates as (x/scale, y/scale).
Patch bicubic_downsample(const Patch& patch, int scale);

// Adds i.i.d. N(0, sigma^2) per value from a seeded deterministic stream.
// Not clamped unless clip is set.
Image awgn(const Image& image, double sigma, std::uint64_t seed, bool clip = false);
Patch awgn(const Patch& patch, double sigma, std::uint64_t seed, bool clip = false);

struct DegradeOptions {
  DegradationSpec spec;
  bool raw = false;                        // write PFT1 float tensors instead of PNG
  std::filesystem::path out_dir;
  std::filesystem::path patches_override;  // where saved HR patches live
  std::filesystem::path images_override;   // where source images live
  int workers = 0;
};

// Writes the degraded counterpart of every record as <patch_id>.png (8-bit,
// rounded and clamped) or <patch_id>.pft with --raw. Per-record noise seeds
// derive as global_seed XOR fnv1a64(patch_id), so outputs are byte-identical
// regardless of worker count or execution order. Records gain a degradation
// provenance entry. Throws InputError listing ids whose HR pixels are
// unavailable.
Manifest degrade_manifest(const Manifest& manifest, const DegradeOptions& options);

}  // namespace patchforge

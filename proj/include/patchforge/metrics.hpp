#pragma once

#include <filesystem>
#include <set>

#include "patchforge/image.hpp"
#include "patchforge/manifest.hpp"

namespace patchforge {

// Mean squared circular forward difference: (1/(HWC)) sum_c sum_{h,w}
// (|d_h x|^2 + |d_w x|^2) with d_h x[h,w] = x[(h+1) mod H, w] - x[h,w].
// Periodic differences keep the value exactly invariant under the 8
// dihedral transforms, which select/augment ordering relies on.
double grad_metric(const Patch& patch);

// Population standard deviation over all H*W*C values jointly (divisor N).
double std_metric(const Patch& patch);

// High-frequency power: unnormalized 2D DFT per channel, energy summed over
// bins whose folded angular frequencies satisfy |w_h| >= pi/2 AND
// |w_w| >= pi/2 (both inclusive), divided by H*W*C.
double freq_metric(const Patch& patch);

// (1/(HWC)) * ||clean - restored||^2. Throws DimensionError on shape mismatch.
double mse_loss(const Patch& clean, const Patch& restored);

// 10*log10(peak^2 / MSE); +infinity for identical inputs.
double psnr(const Patch& a, const Patch& b, double peak = 255.0);
double psnr(const Image& a, const Image& b, double peak = 255.0);

class PatchSource;

// External supplier of per-patch loss values: either a directory of restored
// patches (<patch_id>.png, compared against the clean patch via mse_loss) or
// a CSV sidecar with header "patch_id,loss".
struct LossSource {
  std::filesystem::path restored_dir;
  std::filesystem::path csv_path;

  bool configured() const { return !restored_dir.empty() || !csv_path.empty(); }
};

struct ScoreOptions {
  std::set<MetricKind> metrics;
  LossSource loss;
  std::filesystem::path patches_override;  // where saved HR patches live
  std::filesystem::path images_override;   // where source images live
  int workers = 0;
};

// Adds the requested metric entries to every record. Records missing from the
// loss source are flagged (extras key "loss_missing" plus a provenance
// warning), never silently zeroed. Ordering is unchanged.
Manifest score_manifest(const Manifest& manifest, const ScoreOptions& options);

}  // namespace patchforge

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "patchforge/manifest.hpp"
#include "patchforge/metric_kind.hpp"
#include "patchforge/patch_source.hpp"

namespace patchforge {

// The 8 symmetries of the square. Ids 0-3 are counter-clockwise rotations by
// 0/90/180/270 degrees; ids 4-7 apply a horizontal flip first, then those
// rotations.
inline constexpr int kDihedralCount = 8;

bool dihedral_valid(int id);
int dihedral_compose(int first, int second);  // apply `first`, then `second`
int dihedral_inverse(int id);

// Permutes pixels per the transform; channels untouched. Requires a square
// patch (all patches are); throws DimensionError otherwise.
Patch dihedral_apply(const Patch& patch, int id);

struct SelectionPolicy {
  enum class Mode { keep_fraction, top_k, threshold, random };

  MetricKind metric = MetricKind::grad;  // ignored in random mode
  Mode mode = Mode::keep_fraction;
  double fraction = 0.5;        // keep_fraction: f in (0, 1], keeps ceil(f*N)
  std::uint64_t k = 1;          // top_k / random
  double threshold = 0.0;       // threshold: keeps score >= t
  std::uint64_t seed = 0;       // random
  bool prune = false;           // drop non-selected records instead of flagging

  static const char* mode_name(Mode mode);
};

// Ranks records by the policy's metric (descending, ties broken by ascending
// patch id) and marks the kept ones selected. Non-selected records stay in
// the manifest with selected=false unless policy.prune. Random mode orders by
// patch id and samples with a seeded shuffle. Throws ScoringGapError when a
// metric mode finds records without the metric.
Manifest select(const Manifest& manifest, const SelectionPolicy& policy);

struct AugmentOptions {
  std::vector<int> transforms;   // dihedral ids; deduplicated and sorted
  bool invariance_ack = false;   // operator asserts the task is flip-rotation invariant
  std::filesystem::path materialize_dir;  // write transformed PNGs of selected records
  int workers = 0;
};

// Expands each selected record into one copy per transform (identity keeps
// the original patch id, others suffix "#t<id>"); metric scores are copied,
// which the dihedral invariance of grad/std/freq makes valid. Refuses to run
// without invariance_ack. `source` is only needed when materializing.
Manifest augment_manifest(const Manifest& manifest, const AugmentOptions& options,
                          const PatchSource* source = nullptr);

struct GuidelineCheck {
  std::string id;
  bool pass = false;
  std::string detail;
};

// Advisory audit of a manifest against the mining guideline: patch-count
// floor, roughly-half-by-grad selection, augmentation tags, stride vs patch
// size. Never throws on degenerate manifests.
struct GuidelineReport {
  std::vector<GuidelineCheck> checks;
  bool overfitting_risk = false;

  bool all_pass() const;
  std::string to_text() const;
  nlohmann::ordered_json to_json() const;
};

GuidelineReport guideline_check(const Manifest& manifest);

// Patch-count floor below which overfitting is expected even with
// augmentation; the guideline's "half of total" advisory band.
inline constexpr std::uint64_t kMinPatchesForTraining = 30000;
inline constexpr double kHalfBandLow = 0.4;
inline constexpr double kHalfBandHigh = 0.7;

}  // namespace patchforge

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "patchforge/degradation_spec.hpp"
#include "patchforge/grid.hpp"
#include "patchforge/metric_kind.hpp"
#include "patchforge/version.hpp"

namespace patchforge {

struct ImageDims {
  int width = 0;
  int height = 0;
  int channels = 0;
  bool operator==(const ImageDims&) const = default;
};

// Degradation applied to one record: the (global) spec plus the per-patch
// seed derived as global_seed XOR fnv1a64(patch_id).
struct DegradationProvenance {
  DegradationSpec spec;
  std::uint64_t seed = 0;
  bool operator==(const DegradationProvenance&) const = default;
};

struct PatchRecord {
  std::string patch_id;   // "<image_id>_x<x>_y<y>", augmented copies suffix "#t<id>"
  std::string source_id;
  int x = 0;
  int y = 0;
  int size = 0;
  MetricScores scores;
  bool selected = true;
  int transform = 0;      // dihedral id 0-7
  std::optional<DegradationProvenance> degradation;
  std::map<std::string, nlohmann::json> extras;  // unknown keys, preserved verbatim

  bool has_score(MetricKind kind) const { return scores.count(kind) != 0; }
  double score(MetricKind kind) const { return scores.at(kind); }

  bool operator==(const PatchRecord&) const = default;
};

// What the last selection stage did; consumed by the guideline checker.
struct SelectionSummary {
  std::string metric;      // "loss"/"grad"/"std"/"freq", empty for random mode
  std::string mode;        // keep_fraction | top_k | threshold | random
  double fraction = 0.0;
  std::uint64_t k = 0;
  double threshold = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t kept = 0;
  std::uint64_t total = 0;
  bool operator==(const SelectionSummary&) const = default;
};

struct AugmentSummary {
  std::vector<int> transforms;
  std::string materialized_dir;
  bool operator==(const AugmentSummary&) const = default;
};

struct Provenance {
  std::string schema = kSchemaVersion;
  std::string tool_version = kToolVersion;
  std::string source_dir;    // where source images live (for re-cropping)
  std::string patches_dir;   // saved HR patches, if extraction wrote them
  std::string degraded_dir;  // degraded outputs, if a degrade stage ran
  std::string source_digest;
  std::optional<GridSpec> grid;
  std::map<std::string, ImageDims> images;  // id -> dims of every source image
  std::vector<std::string> stages;          // executed stage descriptors, in order
  std::optional<SelectionSummary> selection;
  std::optional<AugmentSummary> augment;
  std::vector<std::string> warnings;
  std::map<std::string, nlohmann::json> extras;

  bool operator==(const Provenance&) const = default;
};

// Ordered records + provenance; the unit of persistence between CLI stages.
struct Manifest {
  Provenance provenance;
  std::vector<PatchRecord> records;

  bool operator==(const Manifest&) const = default;
};

// JSON-lines: line 1 is the provenance header, then one object per record.
// Keys are written in a fixed order and reals with their shortest round-trip
// representation, so equal manifests serialize byte-identically.
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Throws ParseError (with the offending line number), VersionError on a
// schema mismatch, IoError when the file cannot be read. Unknown keys land
// in the extras maps and survive a rewrite.
Manifest read_manifest(const std::filesystem::path& path);

// RFC-4180-style CSV. Column names: patch_id, source_id, x, y, size,
// selected, transform, loss, grad, std, freq. Missing scores are empty cells.
void export_csv(const Manifest& manifest, const std::vector<std::string>& columns,
                const std::filesystem::path& path);

nlohmann::ordered_json record_to_json(const PatchRecord& record);
nlohmann::ordered_json provenance_to_json(const Provenance& provenance);

}  // namespace patchforge

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <vector>

#include "patchforge/curation.hpp"
#include "patchforge/degradation.hpp"
#include "patchforge/grid.hpp"
#include "patchforge/manifest.hpp"
#include "patchforge/metrics.hpp"

namespace patchforge {

struct ReportStageConfig {
  std::optional<MetricKind> histogram_metric;
  int bins = 100;
  bool log_scale = false;
  bool sqrt_transform = false;
  std::vector<MetricKind> correlate;
  std::optional<MetricKind> summary_metric;
};

// Declarative pipeline: extract -> degrade? -> score? -> select? -> augment?
// -> report?. Optional stages run only when configured; in config files the
// section order must follow that canonical order.
struct PipelineConfig {
  // extract (always runs)
  std::filesystem::path input_dir;
  GridSpec grid;
  bool save_patches = false;

  std::optional<DegradationSpec> degrade;
  bool degrade_raw = false;

  std::optional<std::set<MetricKind>> score_metrics;
  LossSource loss;

  std::optional<SelectionPolicy> policy;

  std::optional<std::vector<int>> transforms;
  bool invariance_ack = false;
  bool materialize = false;

  std::optional<ReportStageConfig> report;

  // global
  std::uint64_t seed = 0;
  int workers = 0;
  std::filesystem::path output_root;
  bool strict = false;
  bool force = false;
};

// Paper-default stages: 96/120 grid, score grad+std+freq, keep the top half
// by grad, all 8 dihedral transforms, histogram/correlation/summary report.
PipelineConfig default_pipeline_config();

// Minimal TOML-subset file: [section] headers, key = value pairs, # comments,
// quoted or bare values. Throws ParseError/ConfigError before any work runs.
PipelineConfig parse_pipeline_config(const std::filesystem::path& path);

struct PipelineResult {
  int exit_code = 0;  // 0 ok; 2 when strict and a guideline check failed
  Manifest final_manifest;
  GuidelineReport guideline;
  std::filesystem::path final_manifest_path;
};

// Runs the stages in order, writing stage_<n>.jsonl after each one, the final
// manifest as final.jsonl, and guideline.{txt,json} under the output root.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace patchforge

// patchforge CLI: every pipeline stage as a subcommand plus a declarative
// runner. Exit codes: 0 ok, 1 error, 2 strict-mode guideline failure.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "patchforge/curation.hpp"
#include "patchforge/degradation.hpp"
#include "patchforge/error.hpp"
#include "patchforge/ingest.hpp"
#include "patchforge/log.hpp"
#include "patchforge/manifest.hpp"
#include "patchforge/metrics.hpp"
#include "patchforge/pipeline.hpp"
#include "patchforge/report.hpp"
#include "patchforge/util.hpp"
#include "patchforge/version.hpp"

namespace pf = patchforge;

namespace {

struct GlobalFlags {
  int workers = 0;
  std::uint64_t seed = 0;
};

std::set<pf::MetricKind> metric_set(const std::string& csv) {
  std::set<pf::MetricKind> out;
  for (const auto& part : pf::split(csv, ','))
    if (!pf::trim(part).empty()) out.insert(pf::parse_metric(pf::trim(part)));
  if (out.empty()) throw pf::ConfigError("empty metric list '" + csv + "'");
  return out;
}

std::vector<pf::MetricKind> metric_list(const std::string& csv) {
  std::vector<pf::MetricKind> out;
  for (const auto& part : pf::split(csv, ','))
    if (!pf::trim(part).empty()) out.push_back(pf::parse_metric(pf::trim(part)));
  if (out.empty()) throw pf::ConfigError("empty metric list '" + csv + "'");
  return out;
}

std::vector<int> transform_list(const std::string& csv) {
  std::vector<int> out;
  for (const auto& part : pf::split(csv, ',')) {
    std::string token = pf::trim(part);
    if (token.empty()) continue;
    int id = static_cast<int>(pf::parse_int(token));
    if (!pf::dihedral_valid(id))
      throw pf::ConfigError("dihedral transform id must be 0..7, got '" + token + "'");
    out.push_back(id);
  }
  if (out.empty()) throw pf::ConfigError("empty transform list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"patchforge: training-patch extraction, scoring, and mining for image restoration"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags global;
  app.add_option("--workers", global.workers, "worker threads (0 = logical CPUs)");
  app.add_option("--seed", global.seed, "global RNG seed");
  // Flag callbacks fire during parsing, before any subcommand work starts.
  app.add_flag_callback("--quiet", [] { pf::log::set_quiet(true); }, "suppress info logging");
  app.add_flag_callback("--json-logs", [] { pf::log::set_json(true); },
                        "one JSON object per log line");

  int exit_code = 0;

  // ----- extract -----
  auto* extract = app.add_subcommand("extract", "decode images and crop grid patches");
  struct {
    std::string input_dir, out, save_patches;
    pf::GridSpec grid;
  } ex;
  extract->add_option("--input-dir", ex.input_dir, "directory of source images")->required();
  extract->add_option("--patch-size", ex.grid.patch_size, "label patch size")->capture_default_str();
  extract->add_option("--stride", ex.grid.stride, "grid stride")->capture_default_str();
  extract->add_option("--scale-align", ex.grid.scale_align,
                      "constrain positions to multiples of this")->capture_default_str();
  extract->add_flag("--cover-edges", ex.grid.cover_edges,
                    "append a flush-to-border position per axis");
  extract->add_option("--out", ex.out, "output manifest path")->required();
  extract->add_option("--save-patches", ex.save_patches, "write each HR patch as <patch_id>.png");
  extract->callback([&] {
    pf::ExtractOptions options;
    options.grid = ex.grid;
    options.save_patches_dir = ex.save_patches;
    options.workers = global.workers;
    pf::Manifest manifest = pf::extract_all(ex.input_dir, options);
    pf::write_manifest(manifest, ex.out);
  });

  // ----- degrade -----
  auto* degrade = app.add_subcommand("degrade", "synthesize degraded patch counterparts");
  struct {
    std::string manifest, model, out_dir, out, input_dir, patches_dir;
    int scale = 2;
    double sigma = 25.0;
    bool clip = false, raw = false;
  } dg;
  degrade->add_option("--manifest", dg.manifest, "input manifest")->required();
  degrade->add_option("--model", dg.model, "bicubic | awgn | bicubic+awgn")->required();
  degrade->add_option("--scale", dg.scale, "downsampling factor")->capture_default_str();
  degrade->add_option("--sigma", dg.sigma, "noise std on the [0,255] scale")->capture_default_str();
  degrade->add_flag("--clip", dg.clip, "clamp noisy output to [0,255]");
  degrade->add_flag("--raw", dg.raw, "write PFT1 float tensors instead of PNG");
  degrade->add_option("--out-dir", dg.out_dir, "directory for degraded patches")->required();
  degrade->add_option("--out", dg.out, "output manifest path")->required();
  degrade->add_option("--input-dir", dg.input_dir, "override recorded source image dir");
  degrade->add_option("--patches-dir", dg.patches_dir, "override recorded HR patches dir");
  degrade->callback([&] {
    pf::DegradeOptions options;
    if (dg.model == "bicubic") {
      options.spec = pf::DegradationSpec::bicubic(dg.scale);
    } else if (dg.model == "awgn") {
      options.spec = pf::DegradationSpec::noise(dg.sigma, global.seed, dg.clip);
    } else if (dg.model == "bicubic+awgn") {
      options.spec = pf::DegradationSpec::composed(
          {pf::DegradationSpec::bicubic(dg.scale),
           pf::DegradationSpec::noise(dg.sigma, global.seed, dg.clip)});
    } else {
      throw pf::ConfigError("unknown model '" + dg.model +
                            "' (expected bicubic, awgn, or bicubic+awgn)");
    }
    pf::validate(options.spec);
    options.raw = dg.raw;
    options.out_dir = dg.out_dir;
    options.patches_override = dg.patches_dir;
    options.images_override = dg.input_dir;
    options.workers = global.workers;
    pf::Manifest manifest = pf::degrade_manifest(pf::read_manifest(dg.manifest), options);
    pf::write_manifest(manifest, dg.out);
  });

  // ----- score -----
  auto* score = app.add_subcommand("score", "compute representative values per patch");
  struct {
    std::string manifest, metrics, restored_dir, loss_csv, out, input_dir, patches_dir;
  } sc;
  score->add_option("--manifest", sc.manifest, "input manifest")->required();
  score->add_option("--metrics", sc.metrics, "comma list of grad,std,freq,loss")->required();
  score->add_option("--restored-dir", sc.restored_dir, "restored patches for the loss metric");
  score->add_option("--loss-csv", sc.loss_csv, "loss sidecar (patch_id,loss)");
  score->add_option("--out", sc.out, "output manifest path")->required();
  score->add_option("--input-dir", sc.input_dir, "override recorded source image dir");
  score->add_option("--patches-dir", sc.patches_dir, "override recorded HR patches dir");
  score->callback([&] {
    pf::ScoreOptions options;
    options.metrics = metric_set(sc.metrics);
    options.loss.restored_dir = sc.restored_dir;
    options.loss.csv_path = sc.loss_csv;
    options.patches_override = sc.patches_dir;
    options.images_override = sc.input_dir;
    options.workers = global.workers;
    pf::Manifest manifest = pf::score_manifest(pf::read_manifest(sc.manifest), options);
    pf::write_manifest(manifest, sc.out);
  });

  // ----- select -----
  auto* select_cmd = app.add_subcommand("select", "rank and keep patches per a policy");
  struct {
    std::string manifest, metric = "grad", out;
    double keep_fraction = 0.0, threshold = -1.0;
    std::int64_t top_k = 0, random_k = 0;
    bool prune = false;
  } sl;
  select_cmd->add_option("--manifest", sl.manifest, "input manifest")->required();
  select_cmd->add_option("--metric", sl.metric, "grad | std | freq | loss")->capture_default_str();
  auto* opt_frac = select_cmd->add_option("--keep-fraction", sl.keep_fraction,
                                          "keep the top ceil(f*N) records");
  auto* opt_topk = select_cmd->add_option("--top-k", sl.top_k, "keep the top k records");
  auto* opt_thresh = select_cmd->add_option("--threshold", sl.threshold, "keep score >= t");
  auto* opt_random = select_cmd->add_option("--random", sl.random_k, "keep k seeded-random records");
  select_cmd->add_flag("--prune", sl.prune, "drop non-selected records");
  select_cmd->add_option("--out", sl.out, "output manifest path")->required();
  select_cmd->callback([&] {
    int modes = (opt_frac->count() ? 1 : 0) + (opt_topk->count() ? 1 : 0) +
                (opt_thresh->count() ? 1 : 0) + (opt_random->count() ? 1 : 0);
    if (modes != 1)
      throw pf::ConfigError("pass exactly one of --keep-fraction, --top-k, --threshold, --random");
    pf::SelectionPolicy policy;
    policy.metric = pf::parse_metric(sl.metric);
    if (opt_frac->count()) {
      policy.mode = pf::SelectionPolicy::Mode::keep_fraction;
      policy.fraction = sl.keep_fraction;
    } else if (opt_topk->count()) {
      policy.mode = pf::SelectionPolicy::Mode::top_k;
      if (sl.top_k < 1) throw pf::ConfigError("--top-k must be >= 1");
      policy.k = static_cast<std::uint64_t>(sl.top_k);
    } else if (opt_thresh->count()) {
      policy.mode = pf::SelectionPolicy::Mode::threshold;
      policy.threshold = sl.threshold;
    } else {
      policy.mode = pf::SelectionPolicy::Mode::random;
      if (sl.random_k < 1) throw pf::ConfigError("--random must be >= 1");
      policy.k = static_cast<std::uint64_t>(sl.random_k);
      policy.seed = global.seed;
    }
    policy.prune = sl.prune;
    pf::Manifest manifest = pf::select(pf::read_manifest(sl.manifest), policy);
    pf::write_manifest(manifest, sl.out);
  });

  // ----- augment -----
  auto* augment = app.add_subcommand("augment", "expand selected records with dihedral transforms");
  struct {
    std::string manifest, transforms, materialize, out, input_dir, patches_dir;
    bool dihedral8 = false, assert_invariant = false;
  } ag;
  augment->add_option("--manifest", ag.manifest, "input manifest")->required();
  augment->add_flag("--dihedral8", ag.dihedral8, "all 8 flip-rotation transforms");
  augment->add_option("--transforms", ag.transforms, "comma list of transform ids 0-7");
  augment->add_flag("--assert-invariant", ag.assert_invariant,
                    "assert the restoration task is flip-rotation invariant");
  augment->add_option("--materialize", ag.materialize, "write transformed PNGs to this dir");
  augment->add_option("--out", ag.out, "output manifest path")->required();
  augment->add_option("--input-dir", ag.input_dir, "override recorded source image dir");
  augment->add_option("--patches-dir", ag.patches_dir, "override recorded HR patches dir");
  augment->callback([&] {
    if (ag.dihedral8 != ag.transforms.empty())
      throw pf::ConfigError("pass exactly one of --dihedral8 or --transforms");
    pf::AugmentOptions options;
    options.transforms =
        ag.dihedral8 ? std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7} : transform_list(ag.transforms);
    options.invariance_ack = ag.assert_invariant;
    options.materialize_dir = ag.materialize;
    options.workers = global.workers;
    pf::Manifest manifest = pf::read_manifest(ag.manifest);
    pf::PatchSource source(manifest.provenance, ag.patches_dir, ag.input_dir);
    pf::Manifest out = pf::augment_manifest(manifest, options, &source);
    pf::write_manifest(out, ag.out);
  });

  // ----- check -----
  auto* check = app.add_subcommand("check", "audit a manifest against the mining guideline");
  struct {
    std::string manifest;
    bool json = false, strict = false;
  } ck;
  check->add_option("--manifest", ck.manifest, "manifest to audit")->required();
  check->add_flag("--json", ck.json, "machine-readable report");
  check->add_flag("--strict", ck.strict, "exit 2 when any check fails");
  check->callback([&] {
    pf::GuidelineReport report = pf::guideline_check(pf::read_manifest(ck.manifest));
    if (ck.json)
      std::cout << report.to_json().dump(2) << "\n";
    else
      std::cout << report.to_text();
    if (ck.strict && !report.all_pass()) exit_code = 2;
  });

  // ----- report -----
  auto* report_cmd = app.add_subcommand("report", "histograms, summaries, metric correlations");
  struct {
    std::string manifest, histogram, correlate, summary, transform, out, svg;
    int bins = 100;
    bool log_scale = false;
  } rp;
  report_cmd->add_option("--manifest", rp.manifest, "input manifest")->required();
  auto* opt_hist = report_cmd->add_option("--histogram", rp.histogram, "metric to histogram");
  report_cmd->add_option("--bins", rp.bins, "histogram bin count")->capture_default_str();
  report_cmd->add_flag("--log", rp.log_scale, "bin log10(value); zeros go to the underflow bucket");
  report_cmd->add_option("--transform", rp.transform, "value transform before binning (sqrt)");
  auto* opt_corr = report_cmd->add_option("--correlate", rp.correlate,
                                          "comma list of metrics to cross-correlate");
  auto* opt_sum = report_cmd->add_option("--summary", rp.summary, "metric to summarize");
  report_cmd->add_option("--out", rp.out, "output CSV path")->required();
  report_cmd->add_option("--svg", rp.svg, "also write a bar chart (histogram only)");
  report_cmd->callback([&] {
    int actions = (opt_hist->count() ? 1 : 0) + (opt_corr->count() ? 1 : 0) +
                  (opt_sum->count() ? 1 : 0);
    if (actions != 1)
      throw pf::ConfigError("pass exactly one of --histogram, --correlate, --summary");
    if (!rp.transform.empty() && rp.transform != "sqrt")
      throw pf::ConfigError("unsupported --transform '" + rp.transform + "' (only sqrt)");
    pf::Manifest manifest = pf::read_manifest(rp.manifest);
    if (opt_hist->count()) {
      pf::HistogramOptions options;
      options.bins = rp.bins;
      options.scale = rp.log_scale ? pf::HistogramScale::log10_value : pf::HistogramScale::linear;
      options.sqrt_transform = rp.transform == "sqrt";
      pf::Histogram hist =
          pf::histogram(pf::metric_column(manifest, pf::parse_metric(rp.histogram)), options);
      pf::write_histogram_csv(hist, rp.out);
      if (!rp.svg.empty()) pf::write_histogram_svg(hist, rp.svg);
    } else if (opt_corr->count()) {
      if (!rp.svg.empty()) throw pf::ConfigError("--svg only applies to --histogram");
      pf::CorrelationMatrix matrix =
          pf::metric_correlation_matrix(manifest, metric_list(rp.correlate));
      pf::write_correlation_csv(matrix, rp.out);
    } else {
      if (!rp.svg.empty()) throw pf::ConfigError("--svg only applies to --histogram");
      pf::SummaryStats stats = pf::summary(manifest, pf::parse_metric(rp.summary));
      pf::write_summary_csv(stats, rp.out);
    }
  });

  // ----- run -----
  auto* run = app.add_subcommand("run", "run a declarative pipeline");
  struct {
    std::string config, input_dir, out_root;
    bool strict = false, force = false;
  } rn;
  run->add_option("--config", rn.config, "pipeline config file (TOML subset)");
  run->add_option("--input-dir", rn.input_dir, "source images (default pipeline or override)");
  run->add_option("--out-root", rn.out_root, "output root directory");
  run->add_flag("--strict", rn.strict, "exit 2 on guideline warnings");
  run->add_flag("--force", rn.force, "overwrite a non-empty output root");
  run->callback([&] {
    pf::PipelineConfig config =
        rn.config.empty() ? pf::default_pipeline_config() : pf::parse_pipeline_config(rn.config);
    if (!rn.input_dir.empty()) config.input_dir = rn.input_dir;
    if (!rn.out_root.empty()) config.output_root = rn.out_root;
    if (rn.strict) config.strict = true;
    if (rn.force) config.force = true;
    if (app.count("--seed")) config.seed = global.seed;
    if (app.count("--workers")) config.workers = global.workers;
    pf::PipelineResult result = pf::run_pipeline(config);
    exit_code = result.exit_code;
  });

  // ----- version -----
  auto* version = app.add_subcommand("version", "print tool and schema versions");
  struct {
    bool json = false;
  } vs;
  version->add_flag("--json", vs.json, "machine-readable output");
  version->callback([&] {
    if (vs.json) {
      nlohmann::ordered_json j{{"tool", "patchforge"},
                               {"version", pf::kToolVersion},
                               {"schema", pf::kSchemaVersion},
                               {"compiler", __VERSION__}};
      std::cout << j.dump() << "\n";
    } else {
      std::cout << "patchforge " << pf::kToolVersion << " (schema " << pf::kSchemaVersion
                << ")\nbuild: " << __VERSION__ << "\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const pf::Error& e) {
    pf::log::set_quiet(false);
    pf::log::error(e.what());
    return 1;
  } catch (const std::exception& e) {
    pf::log::set_quiet(false);
    pf::log::error(std::string("unexpected: ") + e.what());
    return 1;
  }
  return exit_code;
}

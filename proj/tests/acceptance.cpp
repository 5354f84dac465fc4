// Acceptance suite: one pass/fail line per criterion. Invoked as
//   acceptance <path-to-patchforge-cli> [workdir]
// Exits nonzero when any criterion fails. Criterion 1 needs the DIV2K
// training set (PATCHFORGE_DIV2K_DIR or ./data/DIV2K_train_HR); when the
// dataset is absent it is reported as substituted by criterion 4.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "patchforge/curation.hpp"
#include "patchforge/degradation.hpp"
#include "patchforge/error.hpp"
#include "patchforge/image_io.hpp"
#include "patchforge/ingest.hpp"
#include "patchforge/log.hpp"
#include "patchforge/manifest.hpp"
#include "patchforge/metrics.hpp"
#include "patchforge/report.hpp"
#include "patchforge/util.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace patchforge;
namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_work;

struct Criterion {
  int id;
  std::string title;
  enum Status { kPass, kFail, kSkip } status = kFail;
  std::string note;
};

double rel_diff(double a, double b) {
  double denom = std::max(std::abs(a), std::abs(b));
  return denom == 0.0 ? 0.0 : std::abs(a - b) / denom;
}

int run_cli(const std::string& args) {
  std::string cmd = "\"" + g_cli + "\" " + args + " 2>/dev/null";
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// --- criterion 1: DIV2K 151,300-count reproduction (dataset-conditional) ---

fs::path find_div2k() {
  if (const char* env = std::getenv("PATCHFORGE_DIV2K_DIR")) {
    if (fs::is_directory(env)) return env;
  }
  if (fs::is_directory("data/DIV2K_train_HR")) return "data/DIV2K_train_HR";
  return {};
}

Criterion criterion1(bool substitute_ok) {
  Criterion c{1, "DIV2K count reproduction (patch 96, stride 120 over 800 HR images)"};
  fs::path dataset = find_div2k();
  if (dataset.empty()) {
    c.status = substitute_ok ? Criterion::kSkip : Criterion::kFail;
    c.note = substitute_ok
                 ? "dataset absent; count-law suite (criterion 4) substitutes per the gate"
                 : "dataset absent AND the substitute count-law suite failed";
    return c;
  }
  auto started = std::chrono::steady_clock::now();
  for (bool cover_edges : {false, true}) {
    ExtractOptions options;
    options.grid.cover_edges = cover_edges;
    Manifest manifest = extract_all(dataset, options);
    if (manifest.records.size() == 151300) {
      auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
      c.status = elapsed.count() < 300.0 ? Criterion::kPass : Criterion::kFail;
      c.note = "matched with cover_edges=" + std::string(cover_edges ? "on" : "off") + " in " +
               format_double(elapsed.count()) + "s";
      return c;
    }
    c.note += (c.note.empty() ? "" : "; ") + std::string("cover_edges=") +
              (cover_edges ? "on" : "off") + " gave " + std::to_string(manifest.records.size());
  }
  return c;
}

// --- criterion 2: metric oracle equivalence -------------------------------

Criterion criterion2() {
  Criterion c{2, "metric oracle equivalence (64 random patches, sizes 4-16, 1 and 3 channels)"};
  auto started = std::chrono::steady_clock::now();
  std::mt19937_64 rng(9001);
  double worst_freq = 0.0;
  for (int trial = 0; trial < 64; ++trial) {
    int size = 4 + static_cast<int>(rng() % 13);
    int channels = (trial % 2) ? 3 : 1;
    Patch p = pftest::random_patch(rng, size, channels);

    if (grad_metric(p) != pforacle::grad_oracle(p)) {
      c.note = "grad mismatch at trial " + std::to_string(trial);
      return c;
    }
    if (std_metric(p) != pforacle::std_oracle(p)) {
      c.note = "std mismatch at trial " + std::to_string(trial);
      return c;
    }
    double freq_err = rel_diff(freq_metric(p), pforacle::freq_oracle(p));
    worst_freq = std::max(worst_freq, freq_err);
    if (freq_err > 1e-9) {
      c.note = "freq relative error " + format_double(freq_err) + " at trial " +
               std::to_string(trial);
      return c;
    }
    Patch q = pftest::random_patch(rng, size, channels);
    if (rel_diff(mse_loss(p, q), pforacle::mse_oracle(p, q)) > 1e-12) {
      c.note = "mse mismatch at trial " + std::to_string(trial);
      return c;
    }
  }
  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
  if (elapsed.count() >= 10.0) {
    c.note = "too slow: " + format_double(elapsed.count()) + "s (budget 10s)";
    return c;
  }
  c.status = Criterion::kPass;
  c.note = "worst freq relative error " + format_double(worst_freq) + ", " +
           format_double(elapsed.count()) + "s";
  return c;
}

// --- criterion 3: dihedral invariance + selection/augment commutation -----

Criterion criterion3() {
  Criterion c{3, "dihedral invariance (100 patches) and augment/select commutation"};
  std::mt19937_64 rng(9002);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    int size = 4 + static_cast<int>(rng() % 29);
    int channels = (trial % 2) ? 3 : 1;
    Patch p = pftest::random_patch(rng, size, channels);
    double g = grad_metric(p), s = std_metric(p), f = freq_metric(p);
    for (int t = 1; t < kDihedralCount; ++t) {
      Patch q = dihedral_apply(p, t);
      worst = std::max({worst, rel_diff(grad_metric(q), g), rel_diff(std_metric(q), s),
                        rel_diff(freq_metric(q), f)});
    }
  }
  if (worst > 1e-12) {
    c.note = "worst relative drift " + format_double(worst) + " (budget 1e-12)";
    return c;
  }

  // augment-then-select vs select-then-augment at the source-id multiset level
  Manifest manifest;
  for (int i = 0; i < 30; ++i) {
    PatchRecord rec;
    rec.patch_id = "p" + std::to_string(i);
    rec.source_id = "img";
    rec.size = 8;
    rec.scores[MetricKind::grad] = grad_metric(pftest::random_patch(rng, 8, 3));
    manifest.records.push_back(std::move(rec));
  }
  AugmentOptions aug;
  aug.transforms = {0, 1, 2, 3, 4, 5, 6, 7};
  aug.invariance_ack = true;
  auto base_multiset = [](const Manifest& m) {
    std::multiset<std::string> out;
    for (const auto& rec : m.records)
      if (rec.selected) out.insert(base_patch_id(rec.patch_id));
    return out;
  };
  for (std::size_t k : {std::size_t{1}, std::size_t{5}, std::size_t{25}}) {
    SelectionPolicy top8k, topk;
    top8k.mode = topk.mode = SelectionPolicy::Mode::top_k;
    top8k.k = 8 * k;
    topk.k = k;
    auto path_a = base_multiset(select(augment_manifest(manifest, aug), top8k));
    auto path_b = base_multiset(augment_manifest(select(manifest, topk), aug));
    if (path_a != path_b) {
      c.note = "commutation broke at k=" + std::to_string(k);
      return c;
    }
  }
  c.status = Criterion::kPass;
  c.note = "worst metric drift " + format_double(worst) + "; commutation holds for k=1,5,25";
  return c;
}

// --- criterion 4: extraction count law ------------------------------------

Criterion criterion4() {
  Criterion c{4, "extraction count law (200 random grids vs brute-force scan + alignment)"};
  std::mt19937_64 rng(9003);
  for (int trial = 0; trial < 200; ++trial) {
    GridSpec grid;
    grid.patch_size = 2 + static_cast<int>(rng() % 60);
    grid.stride = 1 + static_cast<int>(rng() % 70);
    grid.cover_edges = (rng() % 2) == 0;
    int height = static_cast<int>(rng() % 400);
    int width = static_cast<int>(rng() % 400);
    auto expected = pforacle::grid_scan_oracle(height, width, grid.patch_size, grid.stride, 1,
                                               grid.cover_edges);
    if (enumerate_grid(height, width, grid) != expected) {
      c.note = "mismatch at H=" + std::to_string(height) + " W=" + std::to_string(width) +
               " P=" + std::to_string(grid.patch_size) + " S=" + std::to_string(grid.stride) +
               (grid.cover_edges ? " cover" : "");
      return c;
    }
  }
  for (int scale : {2, 3, 4}) {
    for (int trial = 0; trial < 50; ++trial) {
      GridSpec grid;
      grid.scale_align = scale;
      grid.patch_size = scale * (2 + static_cast<int>(rng() % 20));
      grid.stride = scale * (1 + static_cast<int>(rng() % 20));
      grid.cover_edges = (rng() % 2) == 0;
      int height = static_cast<int>(rng() % 400);
      int width = static_cast<int>(rng() % 400);
      for (auto [x, y] : enumerate_grid(height, width, grid)) {
        if (x % scale != 0 || y % scale != 0) {
          c.note = "alignment violated at s=" + std::to_string(scale);
          return c;
        }
      }
    }
  }
  c.status = Criterion::kPass;
  c.note = "200 grids exact; alignment holds for s=2,3,4";
  return c;
}

// --- criterion 5: degradation oracles --------------------------------------

Criterion criterion5() {
  Criterion c{5, "degradation oracles (bicubic vs direct convolution, AWGN moments, determinism)"};
  std::mt19937_64 rng(9004);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    int scale = (trial % 2) ? 3 : 2;
    int size = scale == 2 ? 8 : 12;  // 8x8->4x4 and 12x12->4x4
    int channels = (rng() % 2) ? 3 : 1;
    Image img = pftest::random_image(rng, "r", size, size, channels);
    Image ours = bicubic_downsample(img, scale);
    auto expected = pforacle::bicubic_oracle(img.pixels, size, size, channels, scale);
    for (std::size_t i = 0; i < expected.size(); ++i)
      worst = std::max(worst, std::abs(ours.pixels[i] - expected[i]));
  }
  if (worst > 1e-6) {
    c.note = "bicubic absolute error " + format_double(worst) + " (budget 1e-6)";
    return c;
  }

  for (double value : {0.0, 64.0, 128.0}) {
    Image img = Image::allocate("c", 12, 12, 3);
    for (double& v : img.pixels) v = value;
    for (int scale : {2, 3}) {
      Image small = bicubic_downsample(img, scale);
      for (double v : small.pixels)
        if (v != value) {
          c.note = "constant " + format_double(value) + " not preserved exactly at x" +
                   std::to_string(scale);
          return c;
        }
    }
  }

  Image zeros = Image::allocate("z", 1000, 1000, 1);
  Image noisy = awgn(zeros, 25.0, 31337);
  double mean = 0.0;
  for (double v : noisy.pixels) mean += v;
  mean /= static_cast<double>(noisy.pixels.size());
  double var = 0.0;
  for (double v : noisy.pixels) var += (v - mean) * (v - mean);
  double stddev = std::sqrt(var / static_cast<double>(noisy.pixels.size()));
  if (std::abs(stddev - 25.0) / 25.0 > 0.01) {
    c.note = "awgn empirical std " + format_double(stddev) + " off by >1%";
    return c;
  }
  Image again = awgn(zeros, 25.0, 31337);
  if (again.pixels != noisy.pixels) {
    c.note = "same seed produced different noise";
    return c;
  }
  c.status = Criterion::kPass;
  c.note = "bicubic worst abs err " + format_double(worst) + "; awgn std " +
           format_double(stddev) + "; seeds reproducible";
  return c;
}

// --- criterion 6: selection semantics ---------------------------------------

Criterion criterion6() {
  Criterion c{6, "selection semantics (permutation, nesting, tie-breaks, scale invariance)"};
  std::mt19937_64 rng(9005);

  auto selected_ids = [](const Manifest& m) {
    std::set<std::string> out;
    for (const auto& rec : m.records)
      if (rec.selected) out.insert(rec.patch_id);
    return out;
  };

  for (int trial = 0; trial < 25; ++trial) {
    Manifest manifest;
    std::size_t n = 4 + rng() % 60;
    for (std::size_t i = 0; i < n; ++i) {
      PatchRecord rec;
      rec.patch_id = "p" + std::to_string(i);
      rec.source_id = "img";
      rec.size = 8;
      rec.scores[MetricKind::grad] = static_cast<double>(rng() % 97);  // ties likely
      manifest.records.push_back(std::move(rec));
    }
    Manifest shuffled = manifest;
    std::shuffle(shuffled.records.begin(), shuffled.records.end(), rng);

    SelectionPolicy policy;
    policy.fraction = 0.5;
    if (selected_ids(select(manifest, policy)) != selected_ids(select(shuffled, policy))) {
      c.note = "permutation invariance broke at trial " + std::to_string(trial);
      return c;
    }
    double f1 = 0.2 + static_cast<double>(rng() % 40) / 100.0;
    double f2 = f1 + 0.2;
    SelectionPolicy p1 = policy, p2 = policy;
    p1.fraction = f1;
    p2.fraction = f2;
    auto s1 = selected_ids(select(manifest, p1));
    auto s2 = selected_ids(select(manifest, p2));
    if (!std::includes(s2.begin(), s2.end(), s1.begin(), s1.end())) {
      c.note = "keep_fraction nesting broke at trial " + std::to_string(trial);
      return c;
    }
  }

  // deterministic tie-breaks: equal scores resolve by ascending patch id
  Manifest ties;
  for (const char* id : {"delta", "alpha", "charlie", "bravo"}) {
    PatchRecord rec;
    rec.patch_id = id;
    rec.source_id = "img";
    rec.size = 8;
    rec.scores[MetricKind::grad] = 1.0;
    ties.records.push_back(std::move(rec));
  }
  SelectionPolicy top2;
  top2.mode = SelectionPolicy::Mode::top_k;
  top2.k = 2;
  if (selected_ids(select(ties, top2)) != std::set<std::string>{"alpha", "bravo"}) {
    c.note = "tie-break is not ascending patch id";
    return c;
  }

  // scaling all pixels leaves the selected id-set unchanged
  std::vector<Patch> patches;
  for (int i = 0; i < 32; ++i) patches.push_back(pftest::random_patch(rng, 8, 3));
  auto manifest_at_scale = [&](double alpha, MetricKind metric) {
    Manifest m;
    for (std::size_t i = 0; i < patches.size(); ++i) {
      Patch scaled = patches[i];
      for (double& v : scaled.pixels) v *= alpha;
      PatchRecord rec;
      rec.patch_id = "p" + std::to_string(i);
      rec.source_id = "img";
      rec.size = 8;
      rec.scores[metric] = metric == MetricKind::grad     ? grad_metric(scaled)
                           : metric == MetricKind::stddev ? std_metric(scaled)
                                                          : freq_metric(scaled);
      m.records.push_back(std::move(rec));
    }
    return m;
  };
  for (MetricKind metric : {MetricKind::grad, MetricKind::stddev, MetricKind::freq}) {
    SelectionPolicy policy;
    policy.metric = metric;
    policy.fraction = 0.5;
    auto baseline = selected_ids(select(manifest_at_scale(1.0, metric), policy));
    for (double alpha : {0.5, 2.0, 255.0}) {
      if (selected_ids(select(manifest_at_scale(alpha, metric), policy)) != baseline) {
        c.note = std::string("ranking changed under alpha=") + format_double(alpha) + " for " +
                 metric_name(metric);
        return c;
      }
    }
  }
  c.status = Criterion::kPass;
  c.note = "all four selection properties hold";
  return c;
}

// --- criterion 7: guideline checker + strict exit codes --------------------

Criterion criterion7() {
  Criterion c{7, "guideline checker (30k floor -> exit 2; paper-shaped setup passes)"};
  fs::path dir = g_work / "c7";
  fs::create_directories(dir);

  Manifest small = pftest::synthetic_manifest(29999);
  write_manifest(small, dir / "small.jsonl");
  fs::path report_txt = dir / "small_report.txt";
  int rc = run_cli("check --manifest \"" + (dir / "small.jsonl").string() + "\" --strict > \"" +
                   report_txt.string() + "\"");
  if (rc != 2) {
    c.note = "29,999 selected patches under --strict exited " + std::to_string(rc) +
             ", expected 2";
    return c;
  }
  if (slurp(report_txt).find("OVERFITTING_RISK") == std::string::npos) {
    c.note = "report lacks the OVERFITTING_RISK marker";
    return c;
  }

  Manifest good = pftest::synthetic_manifest(151300);
  for (std::size_t i = 0; i < good.records.size(); ++i) good.records[i].selected = i < 80000;
  good.provenance.grid = GridSpec{};
  SelectionSummary sel;
  sel.metric = "grad";
  sel.mode = "keep_fraction";
  sel.fraction = 0.5287;
  sel.kept = 80000;
  sel.total = 151300;
  good.provenance.selection = sel;
  AugmentSummary aug;
  aug.transforms = {0, 1, 2, 3, 4, 5, 6, 7};
  good.provenance.augment = aug;
  write_manifest(good, dir / "good.jsonl");
  rc = run_cli("check --manifest \"" + (dir / "good.jsonl").string() + "\" --strict --json > \"" +
               (dir / "good_report.json").string() + "\"");
  if (rc != 0) {
    c.note = "80,000/151,300 by grad with dihedral8 under --strict exited " +
             std::to_string(rc) + ", expected 0";
    return c;
  }
  c.status = Criterion::kPass;
  c.note = "exit 2 with OVERFITTING_RISK below the floor; paper-shaped setup exits 0";
  return c;
}

// --- criterion 8: end-to-end determinism ------------------------------------

Criterion criterion8() {
  Criterion c{8, "end-to-end determinism (toy pipeline, --workers 1 vs --workers 8)"};
  fs::path dir = g_work / "c8";
  fs::path images = dir / "images";
  fs::create_directories(images);
  std::mt19937_64 rng(9006);
  save_png(pftest::random_image(rng, "toy_a", 240, 240, 3), images / "toy_a.png");
  save_png(pftest::random_image(rng, "toy_b", 240, 240, 3), images / "toy_b.png");

  for (int workers : {1, 8}) {
    int rc = run_cli("--workers " + std::to_string(workers) + " --quiet run --input-dir \"" +
                     images.string() + "\" --out-root \"" +
                     (dir / ("run" + std::to_string(workers))).string() + "\"");
    if (rc != 0) {
      c.note = "pipeline with --workers " + std::to_string(workers) + " exited " +
               std::to_string(rc);
      return c;
    }
  }
  for (const char* name : {"stage_1.jsonl", "stage_2.jsonl", "stage_3.jsonl", "stage_4.jsonl",
                           "final.jsonl"}) {
    if (slurp(dir / "run1" / name) != slurp(dir / "run8" / name)) {
      c.note = std::string(name) + " differs between worker counts";
      return c;
    }
  }
  Manifest final_manifest = read_manifest(dir / "run1" / "final.jsonl");
  std::size_t selected = 0;
  for (const auto& rec : final_manifest.records) selected += rec.selected ? 1 : 0;
  if (final_manifest.records.size() != 36 || selected != 32) {
    c.note = "unexpected toy cardinality: " + std::to_string(final_manifest.records.size()) +
             " records, " + std::to_string(selected) + " selected";
    return c;
  }
  c.status = Criterion::kPass;
  c.note = "all stage manifests byte-identical; 8 extracted -> 4 selected -> 32 augmented";
  return c;
}

// --- criterion 9: explicit non-reproducibility statement --------------------

Criterion criterion9(bool upstream_ok) {
  Criterion c{9, "non-reproducibility statement + closed-form statistics checks"};
  bool ok = true;
  ok = ok && pearson({1, 2, 3}, {2, 4, 6}) == 1.0;
  ok = ok && pearson({1, 2, 3}, {3, 2, 1}) == -1.0;
  ok = ok && std::abs(pearson({1, 2, 3, 4}, {1, 3, 2, 4}) - 0.8) < 1e-12;
  Histogram lin = histogram({0, 1, 2, 3}, HistogramOptions{.bins = 2});
  ok = ok && lin.counts == std::vector<std::uint64_t>{2, 2};
  HistogramOptions log_options;
  log_options.bins = 3;
  log_options.scale = HistogramScale::log10_value;
  Histogram lg = histogram({1, 10, 100, 1000}, log_options);
  ok = ok && lg.counts == std::vector<std::uint64_t>{2, 1, 1};
  if (!ok) {
    c.note = "closed-form pearson/histogram checks failed";
    return c;
  }
  if (!upstream_ok) {
    c.note = "property suites (criteria 2-8) did not all pass";
    return c;
  }
  c.status = Criterion::kPass;
  c.note =
      "published PSNR outcomes (e.g. Urban100 32.17 dB, ~0.5 dB augmentation gains, "
      "~0.1-0.2 dB grad-vs-loss deltas) need multi-day GPU training of restoration "
      "networks and are NOT reproduced here; criteria 2-8 plus these closed-form "
      "statistics checks are the substitute acceptance basis";
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-patchforge-cli> [workdir]\n";
    return 2;
  }
  g_cli = argv[1];
  g_work = argc > 2 ? fs::path(argv[2])
                    : fs::temp_directory_path() /
                          ("patchforge_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(g_work);
  log::set_quiet(true);

  std::vector<Criterion> results;
  Criterion c4 = criterion4();
  results.push_back(criterion1(c4.status == Criterion::kPass));
  results.push_back(criterion2());
  results.push_back(criterion3());
  results.push_back(c4);
  results.push_back(criterion5());
  results.push_back(criterion6());
  results.push_back(criterion7());
  results.push_back(criterion8());

  bool upstream_ok = true;
  for (const auto& r : results) upstream_ok = upstream_ok && r.status != Criterion::kFail;
  results.push_back(criterion9(upstream_ok));

  int failures = 0;
  for (const auto& r : results) {
    const char* tag = r.status == Criterion::kPass   ? "[PASS]"
                      : r.status == Criterion::kSkip ? "[SKIP]"
                                                     : "[FAIL]";
    std::cout << tag << " criterion " << r.id << ": " << r.title << "\n        " << r.note
              << "\n";
    if (r.status == Criterion::kFail) ++failures;
  }
  std::cout << (failures == 0 ? "acceptance: all criteria satisfied"
                              : "acceptance: " + std::to_string(failures) + " criteria FAILED")
            << "\n";

  std::error_code ec;
  fs::remove_all(g_work, ec);
  return failures == 0 ? 0 : 1;
}

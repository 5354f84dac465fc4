#include "patchforge/curation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "patchforge/error.hpp"
#include "patchforge/image_io.hpp"
#include "patchforge/log.hpp"
#include "patchforge/util.hpp"

namespace patchforge {

bool dihedral_valid(int id) { return id >= 0 && id < kDihedralCount; }

namespace {

void check_dihedral(int id) {
  if (!dihedral_valid(id))
    throw ConfigError("dihedral transform id must be 0..7, got " + std::to_string(id));
}

Patch rotate90_ccw(const Patch& in) {
  Patch out = in;
  const int n = in.size;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      for (int c = 0; c < in.channels; ++c)
        out.at(y, x, c) = in.at(x, n - 1 - y, c);
  return out;
}

Patch hflip(const Patch& in) {
  Patch out = in;
  const int n = in.size;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      for (int c = 0; c < in.channels; ++c)
        out.at(y, x, c) = in.at(y, n - 1 - x, c);
  return out;
}

// Composition table built once by acting on an asymmetric marker patch.
const std::array<std::array<int, 8>, 8>& compose_table() {
  static const auto table = [] {
    Patch marker = Patch::allocate("m", 0, 0, 3, 1);
    for (int i = 0; i < 9; ++i) marker.pixels[i] = static_cast<double>(i + 1);
    std::array<Patch, 8> images;
    for (int t = 0; t < 8; ++t) images[t] = dihedral_apply(marker, t);

    std::array<std::array<int, 8>, 8> result{};
    for (int a = 0; a < 8; ++a) {
      for (int b = 0; b < 8; ++b) {
        Patch combined = dihedral_apply(images[a], b);
        int found = -1;
        for (int t = 0; t < 8; ++t)
          if (images[t].pixels == combined.pixels) { found = t; break; }
        result[a][b] = found;  // group closure guarantees found != -1
      }
    }
    return result;
  }();
  return table;
}

}  // namespace

Patch dihedral_apply(const Patch& patch, int id) {
  check_dihedral(id);
  Patch out = patch;
  if (id & 4) out = hflip(out);
  for (int r = 0; r < (id & 3); ++r) out = rotate90_ccw(out);
  return out;
}

int dihedral_compose(int first, int second) {
  check_dihedral(first);
  check_dihedral(second);
  return compose_table()[first][second];
}

int dihedral_inverse(int id) {
  check_dihedral(id);
  for (int t = 0; t < 8; ++t)
    if (dihedral_compose(id, t) == 0) return t;
  return 0;  // unreachable
}

const char* SelectionPolicy::mode_name(Mode mode) {
  switch (mode) {
    case Mode::keep_fraction: return "keep_fraction";
    case Mode::top_k: return "top_k";
    case Mode::threshold: return "threshold";
    case Mode::random: return "random";
  }
  return "?";
}

namespace {

void validate(const SelectionPolicy& policy) {
  switch (policy.mode) {
    case SelectionPolicy::Mode::keep_fraction:
      if (!(policy.fraction > 0.0 && policy.fraction <= 1.0))
        throw ConfigError("keep fraction must be in (0, 1], got " + format_double(policy.fraction));
      break;
    case SelectionPolicy::Mode::top_k:
    case SelectionPolicy::Mode::random:
      if (policy.k < 1) throw ConfigError("k must be >= 1");
      break;
    case SelectionPolicy::Mode::threshold:
      if (policy.threshold < 0.0)
        throw ConfigError("threshold must be >= 0, got " + format_double(policy.threshold));
      break;
  }
}

std::string selection_descriptor(const SelectionPolicy& policy) {
  std::ostringstream out;
  out << "select(";
  if (policy.mode != SelectionPolicy::Mode::random)
    out << metric_name(policy.metric) << ",";
  out << SelectionPolicy::mode_name(policy.mode) << "=";
  switch (policy.mode) {
    case SelectionPolicy::Mode::keep_fraction: out << format_double(policy.fraction); break;
    case SelectionPolicy::Mode::top_k: out << policy.k; break;
    case SelectionPolicy::Mode::threshold: out << format_double(policy.threshold); break;
    case SelectionPolicy::Mode::random: out << policy.k << ",seed=" << policy.seed; break;
  }
  out << ")";
  return out.str();
}

}  // namespace

Manifest select(const Manifest& manifest, const SelectionPolicy& policy) {
  validate(policy);
  Manifest out = manifest;
  auto& records = out.records;
  const std::size_t n = records.size();

  std::size_t kept = 0;
  if (policy.mode == SelectionPolicy::Mode::random) {
    std::sort(records.begin(), records.end(),
              [](const PatchRecord& a, const PatchRecord& b) { return a.patch_id < b.patch_id; });
    for (auto& rec : records) rec.selected = false;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    // Fisher-Yates with explicit index draws; std::shuffle's sequence is
    // implementation-defined, this one is pinned.
    std::mt19937_64 rng(policy.seed);
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(order[i - 1], order[j]);
    }
    kept = std::min<std::size_t>(static_cast<std::size_t>(policy.k), n);
    for (std::size_t i = 0; i < kept; ++i) records[order[i]].selected = true;
  } else {
    std::vector<std::string> missing;
    for (const auto& rec : records)
      if (!rec.has_score(policy.metric)) missing.push_back(rec.patch_id);
    if (!missing.empty()) {
      std::ostringstream msg;
      msg << missing.size() << " records lack metric '" << metric_name(policy.metric)
          << "' (run score first): ";
      for (std::size_t i = 0; i < missing.size() && i < 20; ++i)
        msg << (i ? ", " : "") << missing[i];
      if (missing.size() > 20) msg << ", ... +" << (missing.size() - 20) << " more";
      throw ScoringGapError(msg.str());
    }

    const MetricKind metric = policy.metric;
    std::sort(records.begin(), records.end(), [metric](const PatchRecord& a, const PatchRecord& b) {
      double sa = a.score(metric), sb = b.score(metric);
      if (sa != sb) return sa > sb;
      return a.patch_id < b.patch_id;
    });

    switch (policy.mode) {
      case SelectionPolicy::Mode::keep_fraction:
        kept = static_cast<std::size_t>(std::ceil(policy.fraction * static_cast<double>(n)));
        kept = std::min(kept, n);
        break;
      case SelectionPolicy::Mode::top_k:
        kept = std::min<std::size_t>(static_cast<std::size_t>(policy.k), n);
        break;
      case SelectionPolicy::Mode::threshold: {
        kept = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (records[i].score(metric) < policy.threshold) { kept = i; break; }
        }
        break;
      }
      case SelectionPolicy::Mode::random:
        break;  // handled above
    }
    for (std::size_t i = 0; i < n; ++i) records[i].selected = i < kept;
  }

  if (policy.prune) {
    records.erase(std::remove_if(records.begin(), records.end(),
                                 [](const PatchRecord& r) { return !r.selected; }),
                  records.end());
  }

  SelectionSummary summary;
  summary.metric = policy.mode == SelectionPolicy::Mode::random ? "" : metric_name(policy.metric);
  summary.mode = SelectionPolicy::mode_name(policy.mode);
  summary.fraction = policy.fraction;
  summary.k = policy.k;
  summary.threshold = policy.threshold;
  summary.seed = policy.seed;
  summary.kept = kept;
  summary.total = n;
  out.provenance.selection = summary;
  out.provenance.stages.push_back(selection_descriptor(policy));
  log::info(selection_descriptor(policy) + ": kept " + std::to_string(kept) + " of " +
            std::to_string(n));
  return out;
}

Manifest augment_manifest(const Manifest& manifest, const AugmentOptions& options,
                          const PatchSource* source) {
  if (!options.invariance_ack)
    throw ConfigError(
        "refusing to augment: flip-rotation augmentation is only sound for tasks that are "
        "invariant under those transforms (spatially symmetric degradation, pixel-wise "
        "independent noise); pass --assert-invariant to confirm");

  std::vector<int> transforms = options.transforms;
  for (int t : transforms)
    if (!dihedral_valid(t))
      throw ConfigError("dihedral transform id must be 0..7, got " + std::to_string(t));
  std::sort(transforms.begin(), transforms.end());
  transforms.erase(std::unique(transforms.begin(), transforms.end()), transforms.end());
  if (transforms.empty()) throw ConfigError("augment needs at least one transform id");

  if (manifest.provenance.augment)
    throw ConfigError("manifest is already augmented; re-augmenting is not supported");
  for (const auto& rec : manifest.records)
    if (rec.transform != 0)
      throw ConfigError("manifest is already augmented; re-augmenting is not supported");

  Manifest out;
  out.provenance = manifest.provenance;
  out.records.reserve(manifest.records.size() * transforms.size());
  for (const auto& rec : manifest.records) {
    if (!rec.selected) {
      out.records.push_back(rec);
      continue;
    }
    for (int t : transforms) {
      PatchRecord copy = rec;
      copy.transform = t;
      if (t != 0) copy.patch_id = rec.patch_id + "#t" + std::to_string(t);
      out.records.push_back(std::move(copy));
    }
  }

  AugmentSummary summary;
  summary.transforms = transforms;

  if (!options.materialize_dir.empty()) {
    if (source == nullptr || !source->available())
      throw ConfigError("materializing augmented patches needs pixel access; pass "
                        "--patches-dir or --input-dir");
    std::filesystem::create_directories(options.materialize_dir);
    auto missing = source->for_each(out, options.workers, [&](std::size_t i, const Patch& patch) {
      if (!out.records[i].selected) return;
      save_png(patch, options.materialize_dir / (out.records[i].patch_id + ".png"));
    });
    if (!missing.empty()) {
      std::ostringstream msg;
      msg << "missing patch data for " << missing.size() << " records: ";
      for (std::size_t i = 0; i < missing.size() && i < 20; ++i)
        msg << (i ? ", " : "") << missing[i];
      throw InputError(msg.str());
    }
    summary.materialized_dir =
        std::filesystem::absolute(options.materialize_dir).lexically_normal().string();
  }

  out.provenance.augment = summary;
  std::ostringstream ids;
  for (std::size_t i = 0; i < transforms.size(); ++i) ids << (i ? "," : "") << transforms[i];
  out.provenance.stages.push_back("augment(" + ids.str() + ")");
  log::info("augment(" + ids.str() + "): " + std::to_string(manifest.records.size()) +
            " -> " + std::to_string(out.records.size()) + " records");
  return out;
}

bool GuidelineReport::all_pass() const {
  for (const auto& check : checks)
    if (!check.pass) return false;
  return true;
}

std::string GuidelineReport::to_text() const {
  std::ostringstream out;
  for (const auto& check : checks)
    out << (check.pass ? "[PASS] " : "[FAIL] ") << check.id << ": " << check.detail << "\n";
  out << (all_pass() ? "guideline: all checks passed" : "guideline: some checks failed") << "\n";
  return out.str();
}

nlohmann::ordered_json GuidelineReport::to_json() const {
  nlohmann::ordered_json checks_json = nlohmann::ordered_json::array();
  for (const auto& check : checks)
    checks_json.push_back(nlohmann::ordered_json{
        {"id", check.id}, {"pass", check.pass}, {"detail", check.detail}});
  return nlohmann::ordered_json{{"checks", std::move(checks_json)},
                                {"overfitting_risk", overfitting_risk},
                                {"all_pass", all_pass()}};
}

GuidelineReport guideline_check(const Manifest& manifest) {
  GuidelineReport report;

  std::set<std::string> selected_base, total_base;
  for (const auto& rec : manifest.records) {
    std::string base = base_patch_id(rec.patch_id);
    total_base.insert(base);
    if (rec.selected) selected_base.insert(base);
  }

  {
    GuidelineCheck check;
    check.id = "patch_count";
    check.pass = selected_base.size() >= kMinPatchesForTraining;
    if (check.pass) {
      check.detail = std::to_string(selected_base.size()) + " selected patches (>= " +
                     std::to_string(kMinPatchesForTraining) + ")";
    } else {
      check.detail = "OVERFITTING_RISK: " + std::to_string(selected_base.size()) +
                     " selected patches; at least " + std::to_string(kMinPatchesForTraining) +
                     " are needed to train without overfitting";
      report.overfitting_risk = true;
    }
    report.checks.push_back(std::move(check));
  }

  {
    GuidelineCheck check;
    check.id = "half_by_grad";
    const auto& sel = manifest.provenance.selection;
    if (!sel) {
      check.detail = "no selection stage recorded; rank by grad and keep about half";
    } else if (sel->metric != "grad") {
      check.detail = "selection used " + (sel->metric.empty() ? "random" : "'" + sel->metric + "'") +
                     "; ranking by grad gives the best mileage";
    } else if (sel->total == 0) {
      check.detail = "selection ran on an empty manifest";
    } else {
      double fraction = static_cast<double>(sel->kept) / static_cast<double>(sel->total);
      bool in_band = fraction >= kHalfBandLow && fraction <= kHalfBandHigh;
      check.pass = in_band;
      std::ostringstream detail;
      detail << "kept " << sel->kept << "/" << sel->total << " by grad (fraction "
             << format_double(fraction) << (in_band ? ", inside" : ", outside")
             << " the advisory band [" << format_double(kHalfBandLow) << ", "
             << format_double(kHalfBandHigh) << "])";
      check.detail = detail.str();
    }
    report.checks.push_back(std::move(check));
  }

  {
    GuidelineCheck check;
    check.id = "augmentation";
    if (manifest.provenance.augment) {
      check.pass = true;
      std::ostringstream detail;
      detail << "augmentation tags present (transforms";
      for (int t : manifest.provenance.augment->transforms) detail << " " << t;
      detail << ")";
      check.detail = detail.str();
    } else {
      check.detail = "no augmentation recorded; flip-rotation augmentation is recommended "
                     "when the task allows it";
    }
    report.checks.push_back(std::move(check));
  }

  {
    GuidelineCheck check;
    check.id = "stride";
    const auto& grid = manifest.provenance.grid;
    if (!grid) {
      check.detail = "no grid provenance recorded";
    } else if (grid->stride >= grid->patch_size) {
      check.pass = true;
      check.detail = "stride " + std::to_string(grid->stride) + " >= patch size " +
                     std::to_string(grid->patch_size) + " (non-overlapping extraction)";
    } else {
      check.detail = "stride " + std::to_string(grid->stride) + " < patch size " +
                     std::to_string(grid->patch_size) +
                     " (overlapping patches add little when data is plentiful)";
    }
    report.checks.push_back(std::move(check));
  }

  return report;
}

}  // namespace patchforge

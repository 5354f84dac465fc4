#include "patchforge/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "patchforge/error.hpp"
#include "patchforge/ingest.hpp"
#include "patchforge/log.hpp"
#include "patchforge/report.hpp"
#include "patchforge/util.hpp"

namespace patchforge {

namespace {

struct RawSection {
  std::string name;
  int line = 0;
  std::map<std::string, std::string> values;
  std::map<std::string, int> value_lines;
};

std::string strip_comment(const std::string& line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_quotes = !in_quotes;
    if (line[i] == '#' && !in_quotes) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& raw, const std::string& where) {
  if (raw.size() < 2 || raw.back() != '"')
    throw ParseError(where + ": unterminated string");
  std::string out;
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    if (raw[i] == '\\' && i + 2 < raw.size() && (raw[i + 1] == '"' || raw[i + 1] == '\\')) {
      out += raw[i + 1];
      ++i;
    } else {
      out += raw[i];
    }
  }
  return out;
}

std::vector<RawSection> parse_sections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");

  std::vector<RawSection> sections;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string where = "config '" + path.string() + "' line " + std::to_string(line_no);
    std::string text = trim(strip_comment(line));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ParseError(where + ": expected ']'");
      std::string name = trim(text.substr(1, text.size() - 2));
      if (name.empty()) throw ParseError(where + ": empty section name");
      for (const auto& sec : sections)
        if (sec.name == name) throw ParseError(where + ": duplicate section [" + name + "]");
      sections.push_back({name, line_no, {}, {}});
      continue;
    }
    std::size_t eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value'");
    if (sections.empty()) throw ParseError(where + ": key outside any [section]");
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ParseError(where + ": empty key");
    if (value.empty()) throw ParseError(where + ": empty value for '" + key + "'");
    if (value.front() == '"') value = unquote(value, where);
    auto& section = sections.back();
    if (section.values.count(key))
      throw ParseError(where + ": duplicate key '" + key + "' in [" + section.name + "]");
    section.values[key] = value;
    section.value_lines[key] = line_no;
  }
  return sections;
}

class SectionReader {
 public:
  SectionReader(const RawSection& section, const std::string& origin)
      : section_(section), origin_(origin) {}

  bool has(const std::string& key) const { return section_.values.count(key) != 0; }

  template <typename F>
  auto with_context(const std::string& key, F f) const {
    try {
      return f();
    } catch (const ParseError&) {
      throw ConfigError(origin_ + ": [" + section_.name + "] '" + key + "' has a malformed value");
    }
  }

  std::string str(const std::string& key) const {
    auto it = section_.values.find(key);
    if (it == section_.values.end())
      throw ConfigError(origin_ + ": [" + section_.name + "] needs '" + key + "'");
    used_.insert(key);
    return it->second;
  }
  std::string str_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    return with_context(key, [&] { return parse_int(str(key)); });
  }
  std::uint64_t uinteger(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    return with_context(key, [&] { return parse_uint(str(key)); });
  }
  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return with_context(key, [&] { return parse_double(str(key)); });
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    std::string v = lower(str(key));
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(origin_ + ": [" + section_.name + "] '" + key + "' must be true or false");
  }

  void reject_unknown() const {
    for (const auto& [key, value] : section_.values)
      if (!used_.count(key))
        throw ConfigError(origin_ + ": unknown key '" + key + "' in [" + section_.name + "]");
  }

 private:
  const RawSection& section_;
  std::string origin_;
  mutable std::set<std::string> used_;
};

std::set<MetricKind> parse_metric_set(const std::string& csv) {
  std::set<MetricKind> out;
  for (const auto& part : split(csv, ','))
    if (!trim(part).empty()) out.insert(parse_metric(trim(part)));
  if (out.empty()) throw ConfigError("empty metric list '" + csv + "'");
  return out;
}

std::vector<MetricKind> parse_metric_list(const std::string& csv) {
  std::vector<MetricKind> out;
  for (const auto& part : split(csv, ','))
    if (!trim(part).empty()) out.push_back(parse_metric(trim(part)));
  if (out.empty()) throw ConfigError("empty metric list '" + csv + "'");
  return out;
}

std::vector<int> parse_transform_list(const std::string& text) {
  if (lower(trim(text)) == "dihedral8") return {0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<int> out;
  for (const auto& part : split(text, ',')) {
    std::string token = trim(part);
    if (token.empty()) continue;
    int id = static_cast<int>(parse_int(token));
    if (!dihedral_valid(id))
      throw ConfigError("dihedral transform id must be 0..7, got '" + token + "'");
    out.push_back(id);
  }
  if (out.empty()) throw ConfigError("empty transform list '" + text + "'");
  return out;
}

DegradationSpec parse_degradation(const SectionReader& reader, std::uint64_t global_seed,
                                  const std::string& origin) {
  std::string model = lower(reader.str("model"));
  std::uint64_t seed = reader.uinteger("seed", global_seed);
  bool clip = reader.boolean("clip", false);
  if (model == "bicubic")
    return DegradationSpec::bicubic(static_cast<int>(reader.integer("scale", 2)));
  if (model == "awgn")
    return DegradationSpec::noise(reader.real("sigma", 25.0), seed, clip);
  if (model == "bicubic+awgn")
    return DegradationSpec::composed(
        {DegradationSpec::bicubic(static_cast<int>(reader.integer("scale", 2))),
         DegradationSpec::noise(reader.real("sigma", 25.0), seed, clip)});
  throw ConfigError(origin + ": unknown degradation model '" + model +
                    "' (expected bicubic, awgn, or bicubic+awgn)");
}

SelectionPolicy parse_policy(const SectionReader& reader, std::uint64_t global_seed,
                             const std::string& origin) {
  SelectionPolicy policy;
  int modes = 0;
  if (reader.has("keep_fraction")) {
    policy.mode = SelectionPolicy::Mode::keep_fraction;
    policy.fraction = reader.real("keep_fraction", 0.5);
    ++modes;
  }
  if (reader.has("top_k")) {
    policy.mode = SelectionPolicy::Mode::top_k;
    policy.k = reader.uinteger("top_k", 1);
    ++modes;
  }
  if (reader.has("threshold")) {
    policy.mode = SelectionPolicy::Mode::threshold;
    policy.threshold = reader.real("threshold", 0.0);
    ++modes;
  }
  if (reader.has("random")) {
    policy.mode = SelectionPolicy::Mode::random;
    policy.k = reader.uinteger("random", 1);
    ++modes;
  }
  if (modes != 1)
    throw ConfigError(origin + ": [select] needs exactly one of keep_fraction, top_k, "
                      "threshold, random");
  policy.metric = parse_metric(reader.str_or("metric", "grad"));  // ignored by random mode
  policy.seed = reader.uinteger("seed", global_seed);
  policy.prune = reader.boolean("prune", false);
  return policy;
}

}  // namespace

PipelineConfig default_pipeline_config() {
  PipelineConfig config;
  config.grid = GridSpec{};  // 96 / 120, no alignment, no edge covering
  config.score_metrics = {MetricKind::grad, MetricKind::stddev, MetricKind::freq};
  SelectionPolicy policy;
  policy.metric = MetricKind::grad;
  policy.mode = SelectionPolicy::Mode::keep_fraction;
  policy.fraction = 0.5;
  config.policy = policy;
  config.transforms = std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7};
  // The default targets bicubic SR / AWGN denoising, which are flip-rotation
  // invariant tasks; config files must assert this explicitly.
  config.invariance_ack = true;
  ReportStageConfig report;
  report.histogram_metric = MetricKind::grad;
  report.log_scale = true;
  report.correlate = {MetricKind::grad, MetricKind::stddev, MetricKind::freq};
  report.summary_metric = MetricKind::grad;
  config.report = report;
  return config;
}

PipelineConfig parse_pipeline_config(const std::filesystem::path& path) {
  const std::string origin = "config '" + path.string() + "'";
  auto sections = parse_sections(path);

  static const std::vector<std::string> kCanonical = {"extract", "degrade", "score",
                                                      "select",  "augment", "report"};
  // [global] may appear anywhere; stage sections must follow canonical order.
  std::size_t canon_pos = 0;
  bool has_extract = false;
  for (const auto& section : sections) {
    if (section.name == "global") continue;
    auto it = std::find(kCanonical.begin(), kCanonical.end(), section.name);
    if (it == kCanonical.end())
      throw ConfigError(origin + ": unknown section [" + section.name + "]");
    std::size_t pos = static_cast<std::size_t>(it - kCanonical.begin());
    if (pos < canon_pos)
      throw ConfigError(origin + ": stage [" + section.name +
                        "] is out of order; stages must follow extract, degrade, score, "
                        "select, augment, report");
    canon_pos = pos + 1;
    if (section.name == "extract") has_extract = true;
  }
  if (!has_extract) throw ConfigError(origin + ": missing required [extract] section");

  PipelineConfig config;
  bool has_score = false, has_select = false, select_random = false, has_augment = false;

  // Global first so stage seeds can default to it.
  for (const auto& section : sections) {
    if (section.name != "global") continue;
    SectionReader reader(section, origin);
    config.seed = reader.uinteger("seed", 0);
    config.workers = static_cast<int>(reader.integer("workers", 0));
    config.output_root = reader.str_or("output_root", "");
    config.strict = reader.boolean("strict", false);
    reader.reject_unknown();
  }

  for (const auto& section : sections) {
    SectionReader reader(section, origin);
    if (section.name == "global") {
      continue;
    } else if (section.name == "extract") {
      config.input_dir = reader.str_or("input_dir", "");
      config.grid.patch_size = static_cast<int>(reader.integer("patch_size", 96));
      config.grid.stride = static_cast<int>(reader.integer("stride", 120));
      config.grid.scale_align = static_cast<int>(reader.integer("scale_align", 1));
      config.grid.cover_edges = reader.boolean("cover_edges", false);
      config.save_patches = reader.boolean("save_patches", false);
      validate(config.grid);
    } else if (section.name == "degrade") {
      config.degrade = parse_degradation(reader, config.seed, origin);
      validate(*config.degrade);
      config.degrade_raw = reader.boolean("raw", false);
    } else if (section.name == "score") {
      config.score_metrics = parse_metric_set(reader.str_or("metrics", "grad,std,freq"));
      config.loss.restored_dir = reader.str_or("restored_dir", "");
      config.loss.csv_path = reader.str_or("loss_csv", "");
      if (config.score_metrics->count(MetricKind::loss) && !config.loss.configured())
        throw ConfigError(origin + ": [score] metric 'loss' needs restored_dir or loss_csv");
      has_score = true;
    } else if (section.name == "select") {
      config.policy = parse_policy(reader, config.seed, origin);
      has_select = true;
      select_random = config.policy->mode == SelectionPolicy::Mode::random;
    } else if (section.name == "augment") {
      config.transforms = parse_transform_list(reader.str_or("transforms", "dihedral8"));
      config.invariance_ack = reader.boolean("assert_invariant", false);
      config.materialize = reader.boolean("materialize", false);
      has_augment = true;
    } else if (section.name == "report") {
      ReportStageConfig report;
      if (reader.has("histogram")) report.histogram_metric = parse_metric(reader.str("histogram"));
      report.bins = static_cast<int>(reader.integer("bins", 100));
      report.log_scale = reader.boolean("log", false);
      report.sqrt_transform = reader.boolean("sqrt", false);
      if (reader.has("correlate")) report.correlate = parse_metric_list(reader.str("correlate"));
      if (reader.has("summary")) report.summary_metric = parse_metric(reader.str("summary"));
      config.report = report;
    }
    reader.reject_unknown();
  }

  if (has_select && !select_random && !has_score)
    throw ConfigError(origin + ": [select] by metric needs a [score] stage before it");
  if (has_augment && !has_select)
    throw ConfigError(origin + ": [augment] needs a [select] stage before it");
  return config;
}

namespace {

template <typename F>
auto run_stage(const std::string& name, F f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error("stage " + name + ": " + e.what());
  }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  if (config.input_dir.empty()) throw ConfigError("pipeline needs an input directory");
  if (config.output_root.empty()) throw ConfigError("pipeline needs an output root");

  const std::filesystem::path root = config.output_root;
  std::error_code ec;
  if (std::filesystem::exists(root, ec) && !std::filesystem::is_empty(root, ec) && !config.force)
    throw ConfigError("output root '" + root.string() +
                      "' is not empty; pass --force to overwrite");
  std::filesystem::create_directories(root);

  int stage_no = 0;
  auto checkpoint = [&](const Manifest& manifest) {
    ++stage_no;
    write_manifest(manifest, root / ("stage_" + std::to_string(stage_no) + ".jsonl"));
  };

  Manifest manifest = run_stage("extract", [&] {
    ExtractOptions options;
    options.grid = config.grid;
    if (config.save_patches) options.save_patches_dir = root / "patches";
    options.workers = config.workers;
    return extract_all(config.input_dir, options);
  });
  checkpoint(manifest);

  if (config.degrade) {
    manifest = run_stage("degrade", [&] {
      DegradeOptions options;
      options.spec = *config.degrade;
      options.raw = config.degrade_raw;
      options.out_dir = root / "degraded";
      options.workers = config.workers;
      return degrade_manifest(manifest, options);
    });
    checkpoint(manifest);
  }

  if (config.score_metrics) {
    manifest = run_stage("score", [&] {
      ScoreOptions options;
      options.metrics = *config.score_metrics;
      options.loss = config.loss;
      options.workers = config.workers;
      return score_manifest(manifest, options);
    });
    checkpoint(manifest);
  }

  if (config.policy) {
    manifest = run_stage("select", [&] { return select(manifest, *config.policy); });
    checkpoint(manifest);
  }

  if (config.transforms) {
    manifest = run_stage("augment", [&] {
      AugmentOptions options;
      options.transforms = *config.transforms;
      options.invariance_ack = config.invariance_ack;
      if (config.materialize) options.materialize_dir = root / "augmented";
      options.workers = config.workers;
      PatchSource source(manifest.provenance);
      return augment_manifest(manifest, options, &source);
    });
    checkpoint(manifest);
  }

  if (config.report) {
    run_stage("report", [&] {
      const ReportStageConfig& rep = *config.report;
      if (rep.histogram_metric) {
        HistogramOptions options;
        options.bins = rep.bins;
        options.scale = rep.log_scale ? HistogramScale::log10_value : HistogramScale::linear;
        options.sqrt_transform = rep.sqrt_transform;
        Histogram hist = histogram(metric_column(manifest, *rep.histogram_metric), options);
        std::string stem = std::string("report_histogram_") + metric_name(*rep.histogram_metric);
        write_histogram_csv(hist, root / (stem + ".csv"));
        write_histogram_svg(hist, root / (stem + ".svg"));
      }
      if (rep.correlate.size() >= 2) {
        CorrelationMatrix matrix = metric_correlation_matrix(manifest, rep.correlate);
        write_correlation_csv(matrix, root / "report_correlation.csv");
      }
      if (rep.summary_metric) {
        SummaryStats stats = summary(manifest, *rep.summary_metric);
        write_summary_csv(stats, root / (std::string("report_summary_") +
                                         metric_name(*rep.summary_metric) + ".csv"));
      }
      return 0;
    });
  }

  PipelineResult result;
  result.guideline = guideline_check(manifest);
  {
    std::ofstream out(root / "guideline.txt", std::ios::binary);
    out << result.guideline.to_text();
  }
  {
    std::ofstream out(root / "guideline.json", std::ios::binary);
    out << result.guideline.to_json().dump(2) << "\n";
  }
  result.final_manifest_path = root / "final.jsonl";
  write_manifest(manifest, result.final_manifest_path);
  result.final_manifest = std::move(manifest);
  result.exit_code = (config.strict && !result.guideline.all_pass()) ? 2 : 0;

  for (const auto& check : result.guideline.checks)
    (check.pass ? log::info : log::warn)(std::string("guideline ") + check.id + ": " + check.detail);
  log::info("pipeline finished; final manifest at " + result.final_manifest_path.string());
  return result;
}

}  // namespace patchforge

#include "patchforge/manifest.hpp"

#include <algorithm>
#include <fstream>

#include "patchforge/error.hpp"
#include "patchforge/util.hpp"

namespace patchforge {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json grid_to_json(const GridSpec& grid) {
  return ordered_json{{"patch_size", grid.patch_size},
                      {"stride", grid.stride},
                      {"scale_align", grid.scale_align},
                      {"cover_edges", grid.cover_edges}};
}

GridSpec grid_from_json(const nlohmann::json& j) {
  GridSpec grid;
  grid.patch_size = j.at("patch_size").get<int>();
  grid.stride = j.at("stride").get<int>();
  grid.scale_align = j.at("scale_align").get<int>();
  grid.cover_edges = j.at("cover_edges").get<bool>();
  return grid;
}

ordered_json selection_to_json(const SelectionSummary& s) {
  ordered_json j;
  j["metric"] = s.metric;
  j["mode"] = s.mode;
  if (s.mode == "keep_fraction") j["fraction"] = s.fraction;
  if (s.mode == "top_k" || s.mode == "random") j["k"] = s.k;
  if (s.mode == "threshold") j["threshold"] = s.threshold;
  if (s.mode == "random") j["seed"] = s.seed;
  j["kept"] = s.kept;
  j["total"] = s.total;
  return j;
}

SelectionSummary selection_from_json(const nlohmann::json& j) {
  SelectionSummary s;
  s.metric = j.at("metric").get<std::string>();
  s.mode = j.at("mode").get<std::string>();
  s.fraction = j.value("fraction", 0.0);
  s.k = j.value("k", std::uint64_t{0});
  s.threshold = j.value("threshold", 0.0);
  s.seed = j.value("seed", std::uint64_t{0});
  s.kept = j.at("kept").get<std::uint64_t>();
  s.total = j.at("total").get<std::uint64_t>();
  return s;
}

MetricScores scores_from_json(const nlohmann::json& j) {
  MetricScores scores;
  for (auto it = j.begin(); it != j.end(); ++it)
    scores[parse_metric(it.key())] = it.value().get<double>();
  return scores;
}

PatchRecord record_from_json(const nlohmann::json& j) {
  PatchRecord rec;
  rec.patch_id = j.at("patch_id").get<std::string>();
  rec.source_id = j.at("source_id").get<std::string>();
  rec.x = j.at("x").get<int>();
  rec.y = j.at("y").get<int>();
  rec.size = j.at("size").get<int>();
  rec.scores = scores_from_json(j.at("scores"));
  rec.selected = j.at("selected").get<bool>();
  rec.transform = j.at("transform").get<int>();
  if (j.contains("degradation") && !j.at("degradation").is_null()) {
    DegradationProvenance prov;
    prov.spec = degradation_from_json(j.at("degradation").at("spec"));
    prov.seed = j.at("degradation").at("seed").get<std::uint64_t>();
    rec.degradation = prov;
  }
  static const char* known[] = {"patch_id", "source_id", "x",         "y",
                                "size",     "scores",    "selected",  "transform",
                                "degradation"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool is_known = false;
    for (const char* k : known)
      if (it.key() == k) { is_known = true; break; }
    if (!is_known) rec.extras[it.key()] = it.value();
  }
  return rec;
}

Provenance provenance_from_json(const nlohmann::json& j) {
  Provenance prov;
  prov.schema = j.at("schema").get<std::string>();
  prov.tool_version = j.value("tool_version", "");
  prov.source_dir = j.value("source_dir", "");
  prov.patches_dir = j.value("patches_dir", "");
  prov.degraded_dir = j.value("degraded_dir", "");
  prov.source_digest = j.value("source_digest", "");
  if (j.contains("grid")) prov.grid = grid_from_json(j.at("grid"));
  if (j.contains("images")) {
    for (auto it = j.at("images").begin(); it != j.at("images").end(); ++it) {
      ImageDims dims;
      dims.width = it.value().at("width").get<int>();
      dims.height = it.value().at("height").get<int>();
      dims.channels = it.value().at("channels").get<int>();
      prov.images[it.key()] = dims;
    }
  }
  if (j.contains("stages")) prov.stages = j.at("stages").get<std::vector<std::string>>();
  if (j.contains("selection")) prov.selection = selection_from_json(j.at("selection"));
  if (j.contains("augment")) {
    AugmentSummary aug;
    aug.transforms = j.at("augment").at("transforms").get<std::vector<int>>();
    aug.materialized_dir = j.at("augment").value("materialized_dir", "");
    prov.augment = aug;
  }
  if (j.contains("warnings")) prov.warnings = j.at("warnings").get<std::vector<std::string>>();
  static const char* known[] = {"schema",    "tool_version", "source_dir", "patches_dir",
                                "degraded_dir", "source_digest", "grid",   "images",
                                "stages",    "selection",    "augment",    "warnings"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool is_known = false;
    for (const char* k : known)
      if (it.key() == k) { is_known = true; break; }
    if (!is_known) prov.extras[it.key()] = it.value();
  }
  return prov;
}

}  // namespace

nlohmann::ordered_json record_to_json(const PatchRecord& rec) {
  ordered_json j;
  j["patch_id"] = rec.patch_id;
  j["source_id"] = rec.source_id;
  j["x"] = rec.x;
  j["y"] = rec.y;
  j["size"] = rec.size;
  ordered_json scores = ordered_json::object();
  for (const auto& [kind, value] : rec.scores) scores[metric_name(kind)] = value;
  j["scores"] = std::move(scores);
  j["selected"] = rec.selected;
  j["transform"] = rec.transform;
  if (rec.degradation) {
    ordered_json d;
    d["spec"] = degradation_to_json(rec.degradation->spec);
    d["seed"] = rec.degradation->seed;
    j["degradation"] = std::move(d);
  }
  for (const auto& [key, value] : rec.extras) j[key] = value;
  return j;
}

nlohmann::ordered_json provenance_to_json(const Provenance& prov) {
  ordered_json j;
  j["schema"] = prov.schema;
  j["tool_version"] = prov.tool_version;
  if (!prov.source_dir.empty()) j["source_dir"] = prov.source_dir;
  if (!prov.patches_dir.empty()) j["patches_dir"] = prov.patches_dir;
  if (!prov.degraded_dir.empty()) j["degraded_dir"] = prov.degraded_dir;
  if (!prov.source_digest.empty()) j["source_digest"] = prov.source_digest;
  if (prov.grid) j["grid"] = grid_to_json(*prov.grid);
  if (!prov.images.empty()) {
    ordered_json images = ordered_json::object();
    for (const auto& [id, dims] : prov.images)
      images[id] = ordered_json{{"width", dims.width},
                                {"height", dims.height},
                                {"channels", dims.channels}};
    j["images"] = std::move(images);
  }
  j["stages"] = prov.stages;
  if (prov.selection) j["selection"] = selection_to_json(*prov.selection);
  if (prov.augment) {
    ordered_json aug;
    aug["transforms"] = prov.augment->transforms;
    if (!prov.augment->materialized_dir.empty())
      aug["materialized_dir"] = prov.augment->materialized_dir;
    j["augment"] = std::move(aug);
  }
  j["warnings"] = prov.warnings;
  for (const auto& [key, value] : prov.extras) j[key] = value;
  return j;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: no newline translation
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  out << provenance_to_json(manifest.provenance).dump() << "\n";
  for (const auto& rec : manifest.records) out << record_to_json(rec).dump() << "\n";
  out.flush();
  if (!out) throw IoError("short write on manifest '" + path.string() + "'");
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read manifest '" + path.string() + "'");

  Manifest manifest;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("manifest '" + path.string() + "' line " + std::to_string(line_no) +
                       ": " + e.what());
    }
    try {
      if (!have_header) {
        manifest.provenance = provenance_from_json(j);
        if (manifest.provenance.schema != kSchemaVersion)
          throw VersionError("manifest '" + path.string() + "' has schema '" +
                             manifest.provenance.schema + "', this tool reads '" +
                             kSchemaVersion + "'");
        have_header = true;
      } else {
        manifest.records.push_back(record_from_json(j));
      }
    } catch (const VersionError&) {
      throw;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("manifest '" + path.string() + "' line " + std::to_string(line_no) +
                       ": " + e.what());
    }
  }
  if (!have_header)
    throw ParseError("manifest '" + path.string() + "' line 1: missing provenance header");
  return manifest;
}

namespace {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace

void export_csv(const Manifest& manifest, const std::vector<std::string>& columns,
                const std::filesystem::path& path) {
  static const std::vector<std::string> kPlain = {"patch_id", "source_id", "x",
                                                  "y",        "size",      "selected",
                                                  "transform"};
  static const std::vector<std::string> kScores = {"loss", "grad", "std", "freq"};
  for (const auto& col : columns) {
    bool ok = std::find(kPlain.begin(), kPlain.end(), col) != kPlain.end() ||
              std::find(kScores.begin(), kScores.end(), col) != kScores.end();
    if (!ok) throw ConfigError("unknown CSV column '" + col + "'");
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write CSV '" + path.string() + "'");

  for (std::size_t i = 0; i < columns.size(); ++i)
    out << (i ? "," : "") << csv_escape(columns[i]);
  out << "\r\n";

  for (const auto& rec : manifest.records) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out << ",";
      const std::string& col = columns[i];
      if (col == "patch_id") out << csv_escape(rec.patch_id);
      else if (col == "source_id") out << csv_escape(rec.source_id);
      else if (col == "x") out << rec.x;
      else if (col == "y") out << rec.y;
      else if (col == "size") out << rec.size;
      else if (col == "selected") out << (rec.selected ? "true" : "false");
      else if (col == "transform") out << rec.transform;
      else {
        MetricKind kind = parse_metric(col);
        if (rec.has_score(kind)) out << format_double(rec.score(kind));
      }
    }
    out << "\r\n";
  }
  out.flush();
  if (!out) throw IoError("short write on CSV '" + path.string() + "'");
}

}  // namespace patchforge

#include <doctest.h>

#include <fstream>
#include <random>

#include "patchforge/error.hpp"
#include "patchforge/manifest.hpp"
#include "patchforge/util.hpp"
#include "testutil.hpp"

using namespace patchforge;

namespace {

Manifest random_manifest(std::mt19937_64& rng, std::size_t records) {
  Manifest manifest;
  manifest.provenance.source_dir = "/data/images";
  manifest.provenance.source_digest = "abc123";
  GridSpec grid;
  grid.patch_size = 32;
  grid.stride = 40;
  manifest.provenance.grid = grid;
  manifest.provenance.images["img0"] = {200, 100, 3};
  manifest.provenance.stages = {"extract", "score(grad)"};
  manifest.provenance.warnings.push_back("something odd");

  std::uniform_real_distribution<double> score(0.0, 1e6);
  for (std::size_t i = 0; i < records; ++i) {
    PatchRecord rec;
    rec.patch_id = "img0_x" + std::to_string(i * 40) + "_y0";
    rec.source_id = "img0";
    rec.x = static_cast<int>(i * 40);
    rec.y = 0;
    rec.size = 32;
    rec.scores[MetricKind::grad] = score(rng);
    if (rng() % 2) rec.scores[MetricKind::freq] = score(rng);
    if (rng() % 3 == 0) rec.scores[MetricKind::loss] = score(rng) / 1e6;
    rec.selected = rng() % 2 == 0;
    rec.transform = static_cast<int>(rng() % 8);
    if (rng() % 4 == 0)
      rec.degradation =
          DegradationProvenance{DegradationSpec::noise(25.0, 7, true), rng()};
    manifest.records.push_back(std::move(rec));
  }
  return manifest;
}

}  // namespace

TEST_CASE("manifest round-trip is lossless") {
  std::mt19937_64 rng(401);
  pftest::TempDir dir("mf");
  for (int trial = 0; trial < 10; ++trial) {
    Manifest manifest = random_manifest(rng, 1 + rng() % 50);
    auto path = dir / ("m" + std::to_string(trial) + ".jsonl");
    write_manifest(manifest, path);
    Manifest back = read_manifest(path);
    CHECK(back == manifest);
  }
}

TEST_CASE("manifest serialization is deterministic") {
  std::mt19937_64 rng(402);
  Manifest manifest = random_manifest(rng, 20);
  pftest::TempDir dir("mfdet");
  write_manifest(manifest, dir / "a.jsonl");
  write_manifest(manifest, dir / "b.jsonl");
  CHECK(pftest::same_bytes(dir / "a.jsonl", dir / "b.jsonl"));
}

TEST_CASE("empty manifest writes a header-only file") {
  pftest::TempDir dir("mfempty");
  Manifest manifest;
  write_manifest(manifest, dir / "empty.jsonl");
  std::string text = pftest::read_file(dir / "empty.jsonl");
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  Manifest back = read_manifest(dir / "empty.jsonl");
  CHECK(back.records.empty());
}

TEST_CASE("reals serialize with their shortest round-trip form") {
  pftest::TempDir dir("mfreal");
  Manifest manifest;
  PatchRecord rec;
  rec.patch_id = "p";
  rec.source_id = "img";
  rec.size = 8;
  rec.scores[MetricKind::grad] = 0.5;
  manifest.records.push_back(rec);
  write_manifest(manifest, dir / "m.jsonl");
  std::string text = pftest::read_file(dir / "m.jsonl");
  CHECK(text.find("\"grad\":0.5") != std::string::npos);
  CHECK(text.find("0.50") == std::string::npos);
}

TEST_CASE("read_manifest errors carry line numbers") {
  pftest::TempDir dir("mfbad");

  SUBCASE("truncated last line") {
    Manifest manifest;
    PatchRecord rec;
    rec.patch_id = "p";
    rec.source_id = "img";
    rec.size = 8;
    manifest.records.push_back(rec);
    write_manifest(manifest, dir / "trunc.jsonl");
    std::string text = pftest::read_file(dir / "trunc.jsonl");
    std::ofstream(dir / "trunc.jsonl", std::ios::binary)
        << text.substr(0, text.size() - 10);  // cut into the record line
    CHECK_THROWS_WITH_AS(read_manifest(dir / "trunc.jsonl"), doctest::Contains("line 2"),
                         ParseError);
  }
  SUBCASE("missing header") {
    std::ofstream(dir / "nohdr.jsonl") << "";
    CHECK_THROWS_AS(read_manifest(dir / "nohdr.jsonl"), ParseError);
  }
  SUBCASE("schema mismatch") {
    std::ofstream(dir / "v2.jsonl") << R"({"schema":"patchforge/2","stages":[],"warnings":[]})"
                                    << "\n";
    CHECK_THROWS_AS(read_manifest(dir / "v2.jsonl"), VersionError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(read_manifest(dir / "gone.jsonl"), IoError); }
  SUBCASE("record with a malformed field type") {
    std::ofstream(dir / "badrec.jsonl")
        << R"({"schema":"patchforge/1","stages":[],"warnings":[]})" << "\n"
        << R"({"patch_id":"p","source_id":"i","x":"NOT_AN_INT","y":0,"size":8,"scores":{},"selected":true,"transform":0})"
        << "\n";
    CHECK_THROWS_WITH_AS(read_manifest(dir / "badrec.jsonl"), doctest::Contains("line 2"),
                         ParseError);
  }
}

TEST_CASE("unknown keys survive a read-rewrite cycle") {
  pftest::TempDir dir("mfextra");
  std::ofstream(dir / "extra.jsonl")
      << R"({"schema":"patchforge/1","stages":[],"warnings":[],"operator":"jane"})" << "\n"
      << R"({"patch_id":"p","source_id":"i","x":0,"y":0,"size":8,"scores":{},"selected":true,"transform":0,"note":"keep me"})"
      << "\n";
  Manifest manifest = read_manifest(dir / "extra.jsonl");
  REQUIRE(manifest.records.size() == 1);
  CHECK(manifest.records[0].extras.at("note") == nlohmann::json("keep me"));
  CHECK(manifest.provenance.extras.at("operator") == nlohmann::json("jane"));

  write_manifest(manifest, dir / "rewrite.jsonl");
  std::string text = pftest::read_file(dir / "rewrite.jsonl");
  CHECK(text.find("keep me") != std::string::npos);
  CHECK(text.find("jane") != std::string::npos);
  CHECK(read_manifest(dir / "rewrite.jsonl") == manifest);
}

TEST_CASE("DIV2K-scale manifest round-trips") {
  Manifest manifest;
  manifest.provenance.grid = GridSpec{};
  manifest.records.reserve(151300);
  std::mt19937_64 rng(403);
  std::uniform_real_distribution<double> score(0.0, 30000.0);
  for (int i = 0; i < 151300; ++i) {
    PatchRecord rec;
    rec.patch_id = "img" + std::to_string(i / 190) + "_x" + std::to_string((i % 190) * 120) +
                   "_y" + std::to_string((i / 7) % 13 * 120);
    rec.source_id = "img" + std::to_string(i / 190);
    rec.x = (i % 190) * 120;
    rec.y = (i / 7) % 13 * 120;
    rec.size = 96;
    rec.scores[MetricKind::grad] = score(rng);
    manifest.records.push_back(std::move(rec));
  }
  pftest::TempDir dir("mfbig");
  write_manifest(manifest, dir / "big.jsonl");
  Manifest back = read_manifest(dir / "big.jsonl");
  CHECK(back.records.size() == 151300);
  CHECK(back == manifest);
}

TEST_CASE("export_csv emits requested columns") {
  pftest::TempDir dir("csv");
  std::mt19937_64 rng(404);
  Manifest manifest = random_manifest(rng, 12);

  SUBCASE("header only for empty manifests") {
    export_csv(Manifest{}, {"patch_id", "grad"}, dir / "empty.csv");
    CHECK(pftest::read_file(dir / "empty.csv") == "patch_id,grad\r\n");
  }

  SUBCASE("scores round-trip through CSV text") {
    export_csv(manifest, {"patch_id", "x", "y", "selected", "grad"}, dir / "m.csv");
    std::ifstream in(dir / "m.csv");
    std::string line;
    std::getline(in, line);  // header
    CHECK(line == "patch_id,x,y,selected,grad\r");
    for (const auto& rec : manifest.records) {
      REQUIRE(std::getline(in, line));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto cells = split(line, ',');
      REQUIRE(cells.size() == 5);
      CHECK(cells[0] == rec.patch_id);
      CHECK(parse_double(cells[4]) == rec.score(MetricKind::grad));  // exact round-trip
    }
  }

  SUBCASE("unknown column is rejected") {
    CHECK_THROWS_AS(export_csv(manifest, {"patch_id", "foo"}, dir / "x.csv"), ConfigError);
  }

  SUBCASE("fields with commas or quotes are escaped") {
    Manifest weird;
    PatchRecord rec;
    rec.patch_id = "a,b\"c";
    rec.source_id = "img";
    rec.size = 8;
    weird.records.push_back(rec);
    export_csv(weird, {"patch_id"}, dir / "quoted.csv");
    CHECK(pftest::read_file(dir / "quoted.csv") == "patch_id\r\n\"a,b\"\"c\"\r\n");
  }

  SUBCASE("missing scores become empty cells") {
    Manifest sparse;
    PatchRecord rec;
    rec.patch_id = "p";
    rec.source_id = "img";
    rec.size = 8;
    sparse.records.push_back(rec);
    export_csv(sparse, {"patch_id", "loss"}, dir / "sparse.csv");
    CHECK(pftest::read_file(dir / "sparse.csv") == "patch_id,loss\r\np,\r\n");
  }
}

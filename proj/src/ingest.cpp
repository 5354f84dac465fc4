#include "patchforge/ingest.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "patchforge/error.hpp"
#include "patchforge/image_io.hpp"
#include "patchforge/log.hpp"
#include "patchforge/parallel.hpp"
#include "patchforge/util.hpp"

namespace patchforge {

std::string make_patch_id(const std::string& image_id, int x, int y) {
  return image_id + "_x" + std::to_string(x) + "_y" + std::to_string(y);
}

namespace {

struct PerImageResult {
  bool decoded = false;
  ImageDims dims;
  std::string id;
  std::vector<PatchRecord> records;
  std::vector<std::string> warnings;
};

}  // namespace

Manifest extract_all(const std::filesystem::path& image_dir, const ExtractOptions& options) {
  validate(options.grid);

  std::error_code ec;
  if (!std::filesystem::is_directory(image_dir, ec) || ec)
    throw InputError("input directory '" + image_dir.string() + "' does not exist");

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(image_dir)) {
    if (entry.is_regular_file() && has_image_extension(entry.path()))
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  if (files.empty())
    throw InputError("no images (png/jpg/bmp) found in '" + image_dir.string() + "'");

  if (!options.save_patches_dir.empty())
    std::filesystem::create_directories(options.save_patches_dir);

  std::vector<PerImageResult> results(files.size());
  parallel_for(files.size(), options.workers, [&](std::size_t i) {
    PerImageResult& res = results[i];
    Image image;
    try {
      image = load_image(files[i]);
    } catch (const Error& e) {
      res.warnings.push_back(std::string("skipped '") + files[i].filename().string() +
                             "': " + e.what());
      return;
    }
    res.decoded = true;
    res.id = image.id;
    res.dims = {image.width, image.height, image.channels};
    auto positions = enumerate_grid(image.height, image.width, options.grid);
    if (positions.empty())
      res.warnings.push_back("image '" + image.id + "' (" + std::to_string(image.width) + "x" +
                             std::to_string(image.height) + ") yields no " +
                             std::to_string(options.grid.patch_size) + "-pixel patches");
    res.records.reserve(positions.size());
    for (const auto& [x, y] : positions) {
      PatchRecord rec;
      rec.patch_id = make_patch_id(image.id, x, y);
      rec.source_id = image.id;
      rec.x = x;
      rec.y = y;
      rec.size = options.grid.patch_size;
      res.records.push_back(std::move(rec));
      if (!options.save_patches_dir.empty()) {
        Patch patch = crop_patch(image, x, y, options.grid.patch_size);
        save_png(patch, options.save_patches_dir / (res.records.back().patch_id + ".png"));
      }
    }
  });

  Manifest manifest;
  Provenance& prov = manifest.provenance;
  prov.source_dir = std::filesystem::absolute(image_dir).lexically_normal().string();
  if (!options.save_patches_dir.empty())
    prov.patches_dir =
        std::filesystem::absolute(options.save_patches_dir).lexically_normal().string();
  prov.grid = options.grid;
  prov.stages.push_back("extract");

  std::set<std::string> seen_ids;
  std::size_t decoded = 0;
  for (auto& res : results) {
    for (auto& w : res.warnings) prov.warnings.push_back(std::move(w));
    if (!res.decoded) continue;
    if (!seen_ids.insert(res.id).second) {
      prov.warnings.push_back("skipped duplicate image id '" + res.id + "'");
      continue;
    }
    ++decoded;
    prov.images[res.id] = res.dims;
    for (auto& rec : res.records) manifest.records.push_back(std::move(rec));
  }
  if (decoded == 0)
    throw InputError("no decodable images in '" + image_dir.string() + "'");

  std::ostringstream digest_input;
  for (const auto& [id, dims] : prov.images)
    digest_input << id << ":" << dims.width << "x" << dims.height << "x" << dims.channels << ";";
  std::ostringstream digest;
  digest << std::hex << fnv1a64(digest_input.str());
  prov.source_digest = digest.str();

  for (const auto& w : prov.warnings) log::warn(w);
  log::info("extracted " + std::to_string(manifest.records.size()) + " patches from " +
            std::to_string(decoded) + " images");
  return manifest;
}

}  // namespace patchforge

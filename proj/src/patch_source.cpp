#include "patchforge/patch_source.hpp"

#include <map>
#include <optional>

#include "patchforge/curation.hpp"
#include "patchforge/error.hpp"
#include "patchforge/grid.hpp"
#include "patchforge/image_io.hpp"
#include "patchforge/parallel.hpp"
#include "patchforge/util.hpp"

namespace patchforge {

PatchSource::PatchSource(const Provenance& provenance,
                         std::filesystem::path patches_override,
                         std::filesystem::path images_override) {
  patches_dir_ = !patches_override.empty() ? std::move(patches_override)
                                           : std::filesystem::path(provenance.patches_dir);
  images_dir_ = !images_override.empty() ? std::move(images_override)
                                         : std::filesystem::path(provenance.source_dir);
}

std::filesystem::path PatchSource::find_source_image(const std::string& source_id) const {
  static const char* kExtensions[] = {".png", ".jpg", ".jpeg", ".bmp"};
  for (const char* ext : kExtensions) {
    std::filesystem::path candidate = images_dir_ / (source_id + ext);
    std::error_code ec;
    if (std::filesystem::exists(candidate, ec) && !ec) return candidate;
  }
  throw IoError("no image file for source '" + source_id + "' under '" + images_dir_.string() + "'");
}

Patch PatchSource::load_base(const PatchRecord& record) const {
  if (!available())
    throw ConfigError("manifest records no patch source; pass --patches-dir or --input-dir");

  std::string base_id = base_patch_id(record.patch_id);
  if (!patches_dir_.empty()) {
    std::filesystem::path file = patches_dir_ / (base_id + ".png");
    std::error_code ec;
    if (std::filesystem::exists(file, ec) && !ec) {
      Image img = load_image(file);
      if (img.height != record.size || img.width != record.size)
        throw DimensionError("patch file '" + file.string() + "' is " +
                             std::to_string(img.width) + "x" + std::to_string(img.height) +
                             ", record says " + std::to_string(record.size));
      Patch patch = Patch::allocate(record.source_id, record.x, record.y, record.size,
                                    img.channels);
      patch.pixels = std::move(img.pixels);
      return patch;
    }
    if (images_dir_.empty())
      throw IoError("no patch file '" + file.string() + "'");
  }
  Image image = load_image(find_source_image(record.source_id));
  return crop_patch(image, record.x, record.y, record.size);
}

Patch PatchSource::load(const PatchRecord& record) const {
  Patch base = load_base(record);
  return record.transform == 0 ? base : dihedral_apply(base, record.transform);
}

std::vector<std::string> PatchSource::for_each(
    const Manifest& manifest, int workers,
    const std::function<void(std::size_t, const Patch&)>& fn) const {
  const auto& records = manifest.records;
  std::vector<std::optional<std::string>> failures(records.size());

  if (records.empty()) return {};
  if (!available())
    throw ConfigError("manifest records no patch source; pass --patches-dir or --input-dir");

  if (!patches_dir_.empty()) {
    parallel_for(records.size(), workers, [&](std::size_t i) {
      try {
        fn(i, load(records[i]));
      } catch (const Error& e) {
        failures[i] = records[i].patch_id + ": " + e.what();
      }
    });
  } else {
    // One decode per source image; an image's records all go to one worker.
    std::map<std::string, std::vector<std::size_t>> by_image;
    for (std::size_t i = 0; i < records.size(); ++i)
      by_image[records[i].source_id].push_back(i);
    std::vector<const std::vector<std::size_t>*> groups;
    std::vector<std::string> ids;
    groups.reserve(by_image.size());
    for (const auto& [id, indices] : by_image) {
      ids.push_back(id);
      groups.push_back(&indices);
    }
    parallel_for(groups.size(), workers, [&](std::size_t g) {
      Image image;
      bool decoded = false;
      std::string image_error;
      try {
        image = load_image(find_source_image(ids[g]));
        decoded = true;
      } catch (const Error& e) {
        image_error = e.what();
      }
      for (std::size_t i : *groups[g]) {
        if (!decoded) {
          failures[i] = records[i].patch_id + ": " + image_error;
          continue;
        }
        try {
          Patch patch = crop_patch(image, records[i].x, records[i].y, records[i].size);
          if (records[i].transform != 0) patch = dihedral_apply(patch, records[i].transform);
          fn(i, patch);
        } catch (const Error& e) {
          failures[i] = records[i].patch_id + ": " + e.what();
        }
      }
    });
  }

  std::vector<std::string> missing;
  for (auto& f : failures)
    if (f) missing.push_back(std::move(*f));
  return missing;
}

}  // namespace patchforge

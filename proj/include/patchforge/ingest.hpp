#pragma once

#include <filesystem>

#include "patchforge/grid.hpp"
#include "patchforge/manifest.hpp"

namespace patchforge {

struct ExtractOptions {
  GridSpec grid;
  std::filesystem::path save_patches_dir;  // empty: don't materialize HR patches
  int workers = 0;
};

// Enumerates patches over every decodable PNG/JPEG/BMP in image_dir. Images
// are visited in lexicographic file-name order and positions row-major, so
// the manifest is byte-reproducible regardless of worker count. Undecodable
// files are skipped with a warning recorded in the provenance. Throws
// InputError when the directory holds no decodable image.
Manifest extract_all(const std::filesystem::path& image_dir, const ExtractOptions& options);

// "<image_id>_x<x>_y<y>", decimal, no padding.
std::string make_patch_id(const std::string& image_id, int x, int y);

}  // namespace patchforge

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "patchforge/image.hpp"
#include "patchforge/manifest.hpp"

namespace patchforge {

// Resolves patch pixels for manifest records. Prefers the saved-patches
// directory recorded in (or overriding) the provenance; otherwise re-crops
// from the source image directory. Augmented records get their dihedral
// transform applied on load.
class PatchSource {
 public:
  PatchSource(const Provenance& provenance,
              std::filesystem::path patches_override = {},
              std::filesystem::path images_override = {});

  bool available() const { return !patches_dir_.empty() || !images_dir_.empty(); }

  // Pixels of the base (untransformed) patch. Throws when unresolvable.
  Patch load_base(const PatchRecord& record) const;
  // Base pixels with record.transform applied.
  Patch load(const PatchRecord& record) const;

  // Calls fn(index, patch) for every record. Patch files load record-parallel;
  // the re-crop path decodes each source image once and is image-parallel.
  // fn must only touch its own index's output slot. Returns "id: reason"
  // entries for records whose pixels could not be resolved (those skip fn).
  std::vector<std::string> for_each(const Manifest& manifest, int workers,
                                    const std::function<void(std::size_t, const Patch&)>& fn) const;

 private:
  std::filesystem::path find_source_image(const std::string& source_id) const;

  std::filesystem::path patches_dir_;
  std::filesystem::path images_dir_;
};

}  // namespace patchforge

#include "patchforge/image.hpp"

#include <utility>

namespace patchforge {

Image Image::allocate(std::string id, int height, int width, int channels) {
  Image img;
  img.id = std::move(id);
  img.height = height;
  img.width = width;
  img.channels = channels;
  img.pixels.assign(static_cast<std::size_t>(height) * width * channels, 0.0);
  return img;
}

Patch Patch::allocate(std::string source_id, int x, int y, int size, int channels) {
  Patch p;
  p.source_id = std::move(source_id);
  p.x = x;
  p.y = y;
  p.size = size;
  p.channels = channels;
  p.pixels.assign(static_cast<std::size_t>(size) * size * channels, 0.0);
  return p;
}

}  // namespace patchforge

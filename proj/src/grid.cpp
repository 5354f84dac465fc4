#include "patchforge/grid.hpp"

#include <algorithm>
#include <string>

#include "patchforge/error.hpp"

namespace patchforge {

void validate(const GridSpec& grid) {
  if (grid.patch_size < 2)
    throw ConfigError("patch_size must be >= 2, got " + std::to_string(grid.patch_size));
  if (grid.stride < 1)
    throw ConfigError("stride must be >= 1, got " + std::to_string(grid.stride));
  if (grid.scale_align < 1)
    throw ConfigError("scale_align must be >= 1, got " + std::to_string(grid.scale_align));
  if (grid.scale_align > 1) {
    if (grid.patch_size % grid.scale_align != 0)
      throw ConfigError("patch_size " + std::to_string(grid.patch_size) +
                        " is not a multiple of scale_align " + std::to_string(grid.scale_align));
    if (grid.stride % grid.scale_align != 0)
      throw ConfigError("stride " + std::to_string(grid.stride) +
                        " is not a multiple of scale_align " + std::to_string(grid.scale_align));
  }
}

std::vector<int> grid_axis_positions(int axis_len, const GridSpec& grid) {
  std::vector<int> positions;
  if (axis_len < grid.patch_size) return positions;
  for (int pos = 0; pos + grid.patch_size <= axis_len; pos += grid.stride)
    positions.push_back(pos);
  if (grid.cover_edges) {
    int flush = axis_len - grid.patch_size;
    flush -= flush % grid.scale_align;  // keep the alignment law on the flush position
    if (positions.empty() || positions.back() != flush) positions.push_back(flush);
  }
  return positions;
}

std::vector<std::pair<int, int>> enumerate_grid(int height, int width, const GridSpec& grid) {
  std::vector<int> ys = grid_axis_positions(height, grid);
  std::vector<int> xs = grid_axis_positions(width, grid);
  std::vector<std::pair<int, int>> out;
  out.reserve(ys.size() * xs.size());
  for (int y : ys)
    for (int x : xs) out.emplace_back(x, y);
  return out;
}

Patch crop_patch(const Image& image, int x, int y, int size) {
  if (x < 0 || y < 0 || x + size > image.width || y + size > image.height)
    throw BoundsError("crop (" + std::to_string(x) + "," + std::to_string(y) + ") size " +
                      std::to_string(size) + " exceeds image '" + image.id + "' (" +
                      std::to_string(image.width) + "x" + std::to_string(image.height) + ")");
  Patch patch = Patch::allocate(image.id, x, y, size, image.channels);
  for (int py = 0; py < size; ++py) {
    const double* src = &image.pixels[image.index(y + py, x, 0)];
    double* dst = &patch.pixels[patch.index(py, 0, 0)];
    std::copy(src, src + static_cast<std::size_t>(size) * image.channels, dst);
  }
  return patch;
}

}  // namespace patchforge

#pragma once

#include <utility>
#include <vector>

#include "patchforge/image.hpp"

namespace patchforge {

// Deterministic crop grid: top-left anchored, stride steps, optional
// flush-to-border position per axis.
struct GridSpec {
  int patch_size = 96;
  int stride = 120;
  int scale_align = 1;     // positions constrained to multiples of this
  bool cover_edges = false;

  bool operator==(const GridSpec&) const = default;
};

// Throws ConfigError when patch_size < 2, stride < 1, scale_align < 1, or
// scale_align > 1 does not divide both patch_size and stride.
void validate(const GridSpec& grid);

// Positions {0, S, 2S, ...} with pos + P <= axis_len. With cover_edges, the
// flush position axis_len - P (snapped down to a scale_align multiple) is
// appended once if it is not already on the grid. Empty when axis_len < P.
std::vector<int> grid_axis_positions(int axis_len, const GridSpec& grid);

// Row-major (y outer, x inner) list of (x, y) crop origins.
std::vector<std::pair<int, int>> enumerate_grid(int height, int width, const GridSpec& grid);

// Pixel-exact window copy; throws BoundsError (with coordinates) when the
// window does not lie fully inside the image.
Patch crop_patch(const Image& image, int x, int y, int size);

}  // namespace patchforge

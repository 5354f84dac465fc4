#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace patchforge {

// Decoded raster. Pixels are doubles on the 8-bit [0, 255] scale, row-major
// [height][width][channels] interleaved, RGB order for 3-channel images.
struct Image {
  std::string id;
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> pixels;

  static Image allocate(std::string id, int height, int width, int channels);

  double at(int y, int x, int c) const {
    return pixels[index(y, x, c)];
  }
  double& at(int y, int x, int c) {
    return pixels[index(y, x, c)];
  }
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
};

// Square crop of an Image, carrying provenance back to its source. (x, y) is
// the top-left corner in the source's (HR) coordinates.
struct Patch {
  std::string source_id;
  int x = 0;
  int y = 0;
  int size = 0;
  int channels = 0;
  std::vector<double> pixels;  // [size][size][channels]

  static Patch allocate(std::string source_id, int x, int y, int size, int channels);

  double at(int py, int px, int c) const {
    return pixels[index(py, px, c)];
  }
  double& at(int py, int px, int c) {
    return pixels[index(py, px, c)];
  }
  std::size_t index(int py, int px, int c) const {
    return (static_cast<std::size_t>(py) * size + px) * channels + c;
  }
};

}  // namespace patchforge

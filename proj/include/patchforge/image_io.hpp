#pragma once

#include <filesystem>

#include "patchforge/image.hpp"

namespace patchforge {

// Decodes a PNG/JPEG/BMP file. 8-bit integer k maps exactly to the real
// value k; grayscale files yield channels=1, color files channels=3.
// Throws IoError for unreadable files and FormatError for unsupported
// bit depths or channel layouts (16-bit, alpha).
Image load_image(const std::filesystem::path& path);

// Writes an 8-bit PNG (values rounded half-away-from-zero, clamped to [0, 255]).
void save_png(const Image& image, const std::filesystem::path& path);
void save_png(const Patch& patch, const std::filesystem::path& path);

// Raw float tensor ("PFT1"): magic, u32 height, u32 width, u32 channels,
// then little-endian f32 row-major payload.
void write_pft1(const double* data, int height, int width, int channels,
                const std::filesystem::path& path);
void write_pft1(const Patch& patch, const std::filesystem::path& path);
Image read_pft1(const std::filesystem::path& path);

bool has_image_extension(const std::filesystem::path& path);

}  // namespace patchforge

#include "patchforge/image_io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "patchforge/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "PFT1 writer assumes a little-endian host");

namespace patchforge {

namespace {

constexpr char kPftMagic[4] = {'P', 'F', 'T', '1'};

std::uint8_t quantize(double v) {
  double r = std::round(v);
  if (r < 0.0) r = 0.0;
  if (r > 255.0) r = 255.0;
  return static_cast<std::uint8_t>(r);
}

cv::Mat to_mat8(const double* data, int height, int width, int channels) {
  cv::Mat mat(height, width, channels == 1 ? CV_8UC1 : CV_8UC3);
  for (int y = 0; y < height; ++y) {
    std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < width; ++x) {
      const double* px = data + (static_cast<std::size_t>(y) * width + x) * channels;
      if (channels == 1) {
        row[x] = quantize(px[0]);
      } else {  // RGB in memory -> BGR for OpenCV
        row[3 * x + 0] = quantize(px[2]);
        row[3 * x + 1] = quantize(px[1]);
        row[3 * x + 2] = quantize(px[0]);
      }
    }
  }
  return mat;
}

void write_png_mat(const cv::Mat& mat, const std::filesystem::path& path) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), mat);
  } catch (const cv::Exception& e) {
    throw IoError("cannot write image '" + path.string() + "': " + e.what());
  }
  if (!ok) throw IoError("cannot write image '" + path.string() + "'");
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec) || ec)
    throw IoError("cannot read image '" + path.string() + "': no such file");

  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty())
    throw FormatError("cannot decode image '" + path.string() + "'");
  if (mat.depth() != CV_8U)
    throw FormatError("unsupported bit depth in '" + path.string() + "' (only 8-bit input is supported)");
  if (mat.channels() != 1 && mat.channels() != 3)
    throw FormatError("unsupported channel layout in '" + path.string() + "' (" +
                      std::to_string(mat.channels()) + " channels; expected 1 or 3)");

  Image img = Image::allocate(path.stem().string(), mat.rows, mat.cols, mat.channels());
  for (int y = 0; y < mat.rows; ++y) {
    const std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mat.cols; ++x) {
      if (img.channels == 1) {
        img.at(y, x, 0) = static_cast<double>(row[x]);
      } else {  // BGR from OpenCV -> RGB in memory
        img.at(y, x, 0) = static_cast<double>(row[3 * x + 2]);
        img.at(y, x, 1) = static_cast<double>(row[3 * x + 1]);
        img.at(y, x, 2) = static_cast<double>(row[3 * x + 0]);
      }
    }
  }
  return img;
}

void save_png(const Image& image, const std::filesystem::path& path) {
  write_png_mat(to_mat8(image.pixels.data(), image.height, image.width, image.channels), path);
}

void save_png(const Patch& patch, const std::filesystem::path& path) {
  write_png_mat(to_mat8(patch.pixels.data(), patch.size, patch.size, patch.channels), path);
}

void write_pft1(const double* data, int height, int width, int channels,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write tensor '" + path.string() + "'");
  out.write(kPftMagic, 4);
  std::uint32_t dims[3] = {static_cast<std::uint32_t>(height),
                           static_cast<std::uint32_t>(width),
                           static_cast<std::uint32_t>(channels)};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  std::size_t count = static_cast<std::size_t>(height) * width * channels;
  std::vector<float> payload(count);
  for (std::size_t i = 0; i < count; ++i) payload[i] = static_cast<float>(data[i]);
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!out) throw IoError("short write on tensor '" + path.string() + "'");
}

void write_pft1(const Patch& patch, const std::filesystem::path& path) {
  write_pft1(patch.pixels.data(), patch.size, patch.size, patch.channels, path);
}

Image read_pft1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read tensor '" + path.string() + "'");
  char magic[4];
  std::uint32_t dims[3];
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || std::memcmp(magic, kPftMagic, 4) != 0)
    throw FormatError("'" + path.string() + "' is not a PFT1 tensor");
  Image img = Image::allocate(path.stem().string(), static_cast<int>(dims[0]),
                              static_cast<int>(dims[1]), static_cast<int>(dims[2]));
  std::size_t count = img.pixels.size();
  std::vector<float> payload(count);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (!in) throw FormatError("truncated PFT1 tensor '" + path.string() + "'");
  for (std::size_t i = 0; i < count; ++i) img.pixels[i] = static_cast<double>(payload[i]);
  return img;
}

bool has_image_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

}  // namespace patchforge

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace patchforge {

// FNV-1a 64-bit. Used for per-patch seed derivation and input digests;
// std::hash is not stable across platforms, this is.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> split(std::string_view s, char sep);
std::string lower(std::string_view s);
std::string trim(std::string_view s);

// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

// Parses the full string as the given type; throws ParseError otherwise.
double parse_double(std::string_view s);
std::int64_t parse_int(std::string_view s);
std::uint64_t parse_uint(std::string_view s);

// "0001_x120_y0#t3" -> "0001_x120_y0". Ids without a transform suffix pass through.
std::string base_patch_id(std::string_view patch_id);

}  // namespace patchforge

#pragma once

namespace patchforge {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kSchemaVersion = "patchforge/1";

}  // namespace patchforge

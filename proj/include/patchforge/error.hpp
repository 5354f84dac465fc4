#pragma once

#include <stdexcept>

namespace patchforge {

// Failure taxonomy shared by the library and the CLI. Everything derives
// from Error so callers can catch broadly; the CLI maps any Error to exit 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : Error { using Error::Error; };           // unreadable/unwritable files
struct FormatError : Error { using Error::Error; };       // unsupported image encodings
struct BoundsError : Error { using Error::Error; };       // out-of-range crop windows
struct DimensionError : Error { using Error::Error; };    // shape mismatches
struct InputError : Error { using Error::Error; };        // unusable inputs (empty dirs, ...)
struct ConfigError : Error { using Error::Error; };       // invalid flags or config values
struct ParseError : Error { using Error::Error; };        // malformed manifest/config text
struct VersionError : Error { using Error::Error; };      // manifest schema mismatch
struct ScoringGapError : Error { using Error::Error; };   // records missing a required metric
struct DataError : Error { using Error::Error; };         // empty columns, undefined correlation

}  // namespace patchforge

#pragma once

#include <string>

namespace patchforge::log {

enum class Level { info, warn, error };

void set_quiet(bool quiet);   // drops info-level messages
void set_json(bool json);     // one JSON object per line on stderr

void emit(Level level, const std::string& msg);

inline void info(const std::string& msg) { emit(Level::info, msg); }
inline void warn(const std::string& msg) { emit(Level::warn, msg); }
inline void error(const std::string& msg) { emit(Level::error, msg); }

}  // namespace patchforge::log

#include "patchforge/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

#include <json.hpp>

namespace patchforge::log {

namespace {
std::atomic<bool> g_quiet{false};
std::atomic<bool> g_json{false};
std::mutex g_mu;

const char* level_name(Level level) {
  switch (level) {
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
  }
  return "info";
}
}  // namespace

void set_quiet(bool quiet) { g_quiet = quiet; }
void set_json(bool json) { g_json = json; }

void emit(Level level, const std::string& msg) {
  if (level == Level::info && g_quiet) return;
  std::lock_guard<std::mutex> lock(g_mu);
  if (g_json) {
    nlohmann::ordered_json line{{"level", level_name(level)}, {"msg", msg}};
    std::cerr << line.dump() << "\n";
  } else {
    std::cerr << "[" << level_name(level) << "] " << msg << "\n";
  }
}

}  // namespace patchforge::log

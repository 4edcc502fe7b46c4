#include "gridgen/log.hpp"

#include <iostream>

namespace gridgen {

namespace {
LogLevel g_level = LogLevel::info;
}

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void log_debug(const std::string& msg) {
  if (g_level <= LogLevel::debug) std::cerr << "[debug] " << msg << "\n";
}

void log_info(const std::string& msg) {
  if (g_level <= LogLevel::info) std::cerr << "[info] " << msg << "\n";
}

void log_warn(const std::string& msg) {
  if (g_level <= LogLevel::warn) std::cerr << "[warn] " << msg << "\n";
}

}  // namespace gridgen

#pragma once

#include <string>

namespace gridgen {

enum class LogLevel { debug = 0, info = 1, warn = 2, quiet = 3 };

void set_log_level(LogLevel level);
LogLevel log_level();

void log_debug(const std::string& msg);
void log_info(const std::string& msg);
void log_warn(const std::string& msg);

}  // namespace gridgen

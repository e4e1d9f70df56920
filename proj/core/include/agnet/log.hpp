// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#pragma once

#include <string_view>

namespace agnet {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

/// Threshold read once from AGNET_LOG_LEVEL (error|warn|info|debug); default warn.
[[nodiscard]] LogLevel log_level();
void set_log_level(LogLevel level);

void log(LogLevel level, std::string_view message);
inline void log_warn(std::string_view m) { log(LogLevel::warn, m); }
inline void log_info(std::string_view m) { log(LogLevel::info, m); }
inline void log_debug(std::string_view m) { log(LogLevel::debug, m); }

} // namespace agnet

#pragma once

#include <string>

namespace party {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// Threshold comes from the PARTY_EVAL_LOG env var (error|warn|info|debug),
// read once per process; default is warn.
LogLevel log_threshold();

void log_message(LogLevel level, const std::string& msg);

inline void log_error(const std::string& msg) { log_message(LogLevel::error, msg); }
inline void log_warn(const std::string& msg) { log_message(LogLevel::warn, msg); }
inline void log_info(const std::string& msg) { log_message(LogLevel::info, msg); }
inline void log_debug(const std::string& msg) { log_message(LogLevel::debug, msg); }

} // namespace party

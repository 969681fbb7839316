#pragma once

#include <string>

namespace mobo::log {

/// Verbosity comes from MOBO_LOG_LEVEL (trace, debug, info, warn, error, off);
/// the default is warn.
void set_level(const std::string& level);

void debug(const std::string& msg);
void info(const std::string& msg);
void warn(const std::string& msg);
void error(const std::string& msg);

}  // namespace mobo::log

#pragma once

#include <string>

// Thin wrapper over spdlog. Verbosity comes from the TSBI_LOG environment
// variable (trace, debug, info, warn, error, off); default is warn.
namespace tsbi::log {

void configure_from_env();
void set_level(const std::string& level);

void debug(const std::string& msg);
void info(const std::string& msg);
void warn(const std::string& msg);
void error(const std::string& msg);

}  // namespace tsbi::log

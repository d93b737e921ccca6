#include "tsbi/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>

#include "tsbi/errors.hpp"

namespace tsbi::log {

namespace {

spdlog::logger& logger() {
    static std::shared_ptr<spdlog::logger> lg = [] {
        auto l = spdlog::stderr_color_mt("tsbi");
        l->set_pattern("[%l] %v");
        const char* env = std::getenv("TSBI_LOG");
        l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
        return l;
    }();
    return *lg;
}

}  // namespace

void configure_from_env() {
    const char* env = std::getenv("TSBI_LOG");
    if (env) set_level(env);
}

void set_level(const std::string& level) {
    const auto lv = spdlog::level::from_str(level);
    if (lv == spdlog::level::off && level != "off") throw InputError("unknown log level '" + level + "'");
    logger().set_level(lv);
}

void debug(const std::string& msg) { logger().debug(msg); }
void info(const std::string& msg) { logger().info(msg); }
void warn(const std::string& msg) { logger().warn(msg); }
void error(const std::string& msg) { logger().error(msg); }

}  // namespace tsbi::log

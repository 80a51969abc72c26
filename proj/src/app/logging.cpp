#include "emoperf/app/logging.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string>

namespace emoperf::app {

void init_logging() {
    auto logger = spdlog::stderr_logger_mt("emoperf");
    logger->set_pattern("[%l] %v");
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv("EMOPERF_LOG")) {
        const auto parsed = spdlog::level::from_str(env);
        // from_str maps unknown names to off; only accept it when asked for.
        if (parsed != spdlog::level::off || std::string(env) == "off") level = parsed;
    }
    logger->set_level(level);
    spdlog::set_default_logger(logger);
}

}  // namespace emoperf::app

#include "aicf/log.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace aicf::log {

void init(const char* level_override) {
  static bool initialized = false;
  if (!initialized) {
    auto logger = spdlog::stderr_color_mt("aicf");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("%Y-%m-%dT%H:%M:%S.%e %^%l%$ %v");
    initialized = true;
  }
  const char* level = level_override ? level_override : std::getenv("AICF_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

}  // namespace aicf::log

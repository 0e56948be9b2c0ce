#pragma once

#include <spdlog/spdlog.h>

namespace aicf::log {

/// Configures the default logger: stderr sink, level from AICF_LOG
/// (trace|debug|info|warn|error|off) unless `level_override` is given.
void init(const char* level_override = nullptr);

}  // namespace aicf::log

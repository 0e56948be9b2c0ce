#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace aicf {

std::string base64_encode(std::string_view data);

/// Returns nothing on invalid input (bad alphabet, bad padding).
std::optional<std::string> base64_decode(std::string_view text);

}  // namespace aicf

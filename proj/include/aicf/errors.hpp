#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace aicf {

using json = nlohmann::json;

/// Registry-originated failure codes carried in EXCEPTION payloads.
enum class RegistryCode : std::uint8_t {
  MissingNode,
  MissingMetric,
  MissingParam,
  Conflict,
  DuplicateId,
  Malformed,
  UnknownId,
  Revoked,
};

std::string_view to_string(RegistryCode code);
std::optional<RegistryCode> registry_code_from_string(std::string_view name);

/// Exception document returned by the Register. `missing` is populated only
/// for the MISSING_* codes (a missing node uses an empty name).
struct RegistryError {
  RegistryCode code = RegistryCode::Malformed;
  std::string detail;
  std::vector<std::pair<std::string, std::string>> missing;  // (node_id, name)

  bool operator==(const RegistryError&) const = default;
};

void to_json(json& j, const RegistryError& e);
void from_json(const json& j, RegistryError& e);

}  // namespace aicf

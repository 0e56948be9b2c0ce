#include "aicf/errors.hpp"

namespace aicf {

std::string_view to_string(RegistryCode code) {
  switch (code) {
    case RegistryCode::MissingNode: return "MISSING_NODE";
    case RegistryCode::MissingMetric: return "MISSING_METRIC";
    case RegistryCode::MissingParam: return "MISSING_PARAM";
    case RegistryCode::Conflict: return "CONFLICT";
    case RegistryCode::DuplicateId: return "DUPLICATE_ID";
    case RegistryCode::Malformed: return "MALFORMED";
    case RegistryCode::UnknownId: return "UNKNOWN_ID";
    case RegistryCode::Revoked: return "REVOKED";
  }
  return "MALFORMED";
}

std::optional<RegistryCode> registry_code_from_string(std::string_view name) {
  if (name == "MISSING_NODE") return RegistryCode::MissingNode;
  if (name == "MISSING_METRIC") return RegistryCode::MissingMetric;
  if (name == "MISSING_PARAM") return RegistryCode::MissingParam;
  if (name == "CONFLICT") return RegistryCode::Conflict;
  if (name == "DUPLICATE_ID") return RegistryCode::DuplicateId;
  if (name == "MALFORMED") return RegistryCode::Malformed;
  if (name == "UNKNOWN_ID") return RegistryCode::UnknownId;
  if (name == "REVOKED") return RegistryCode::Revoked;
  return std::nullopt;
}

void to_json(json& j, const RegistryError& e) {
  j = json{{"code", std::string(to_string(e.code))}, {"detail", e.detail}, {"missing", e.missing}};
}

void from_json(const json& j, RegistryError& e) {
  auto code = registry_code_from_string(j.at("code").get<std::string>());
  e.code = code.value_or(RegistryCode::Malformed);
  e.detail = j.value("detail", std::string());
  e.missing = j.value("missing", std::vector<std::pair<std::string, std::string>>{});
}

}  // namespace aicf

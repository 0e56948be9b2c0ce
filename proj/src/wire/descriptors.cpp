#include "aicf/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace aicf {

namespace {

bool valid_identifier(std::string_view id) {
  if (id.empty()) return false;
  return id.find('/') == std::string_view::npos && id != "*" && id != "#";
}

}  // namespace

std::string_view to_string(NodeType type) {
  switch (type) {
    case NodeType::PonOlt: return "pon_olt";
    case NodeType::PonOnu: return "pon_onu";
    case NodeType::RanDu: return "ran_du";
    case NodeType::RanRu: return "ran_ru";
    case NodeType::Other: return "other";
  }
  return "other";
}

std::optional<NodeType> node_type_from_string(std::string_view name) {
  if (name == "pon_olt") return NodeType::PonOlt;
  if (name == "pon_onu") return NodeType::PonOnu;
  if (name == "ran_du") return NodeType::RanDu;
  if (name == "ran_ru") return NodeType::RanRu;
  if (name == "other") return NodeType::Other;
  return std::nullopt;
}

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Integer: return "integer";
    case ValueKind::Real: return "real";
    case ValueKind::Enumerated: return "enumerated";
  }
  return "integer";
}

std::optional<ValueKind> value_kind_from_string(std::string_view name) {
  if (name == "integer") return ValueKind::Integer;
  if (name == "real") return ValueKind::Real;
  if (name == "enumerated") return ValueKind::Enumerated;
  return std::nullopt;
}

bool ParamSpec::admits(const json& value) const {
  switch (kind) {
    case ValueKind::Integer: {
      if (!value.is_number_integer() && !value.is_number_unsigned()) return false;
      double v = value.get<double>();
      return v >= min && v <= max;
    }
    case ValueKind::Real: {
      if (!value.is_number()) return false;
      double v = value.get<double>();
      return std::isfinite(v) && v >= min && v <= max;
    }
    case ValueKind::Enumerated: {
      if (!value.is_string()) return false;
      const auto& s = value.get_ref<const std::string&>();
      return std::find(choices.begin(), choices.end(), s) != choices.end();
    }
  }
  return false;
}

const MetricSpec* NodeDescriptor::find_metric(std::string_view name) const {
  for (const auto& m : measurements) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

const ParamSpec* NodeDescriptor::find_control(std::string_view name) const {
  for (const auto& p : controls) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::optional<std::string> NodeDescriptor::validate() const {
  if (!valid_identifier(node_id)) return "node_id must be a non-empty identifier";
  std::set<std::string> seen;
  for (const auto& m : measurements) {
    if (!valid_identifier(m.name)) return "metric name invalid: '" + m.name + "'";
    if (!seen.insert(m.name).second) return "duplicate metric name: " + m.name;
  }
  seen.clear();
  for (const auto& p : controls) {
    if (!valid_identifier(p.name)) return "param name invalid: '" + p.name + "'";
    if (!seen.insert(p.name).second) return "duplicate param name: " + p.name;
    if (p.kind == ValueKind::Enumerated) {
      if (p.choices.empty()) return "enumerated param needs choices: " + p.name;
    } else if (p.min > p.max) {
      return "param min > max: " + p.name;
    }
  }
  return std::nullopt;
}

std::optional<std::string> AppDescriptor::validate() const {
  if (!valid_identifier(app_id)) return "app_id must be a non-empty identifier";
  if (priority < 0) return "priority must be >= 0";
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& [node, param] : controlled_params) {
    if (!valid_identifier(node) || !valid_identifier(param)) return "invalid controlled param entry";
    if (!seen.insert({node, param}).second) {
      return "duplicate controlled param: " + node + "/" + param;
    }
  }
  for (const auto& [node, metric] : required_measurements) {
    if (!valid_identifier(node) || !valid_identifier(metric)) return "invalid required measurement entry";
  }
  return std::nullopt;
}

std::string pm_topic(std::string_view node_id, std::string_view metric) {
  std::string t = "node/";
  t += node_id;
  t += "/pm/";
  t += metric;
  return t;
}

std::string ctrl_topic(std::string_view node_id, std::string_view param) {
  std::string t = "node/";
  t += node_id;
  t += "/ctrl/";
  t += param;
  return t;
}

std::vector<std::string> canonical_topics(const NodeDescriptor& descriptor) {
  std::vector<std::string> out;
  out.reserve(descriptor.measurements.size() + descriptor.controls.size());
  for (const auto& m : descriptor.measurements) out.push_back(pm_topic(descriptor.node_id, m.name));
  for (const auto& p : descriptor.controls) out.push_back(ctrl_topic(descriptor.node_id, p.name));
  return out;
}

void to_json(json& j, const MetricSpec& m) {
  j = json{{"name", m.name}, {"unit", m.unit}, {"period_ms", m.period_ms}};
}

void from_json(const json& j, MetricSpec& m) {
  j.at("name").get_to(m.name);
  m.unit = j.value("unit", std::string());
  m.period_ms = j.value("period_ms", 0u);
}

void to_json(json& j, const ParamSpec& p) {
  j = json{{"name", p.name}, {"value_kind", std::string(to_string(p.kind))}};
  if (p.kind == ValueKind::Enumerated) {
    j["choices"] = p.choices;
  } else {
    j["min"] = p.min;
    j["max"] = p.max;
  }
}

void from_json(const json& j, ParamSpec& p) {
  j.at("name").get_to(p.name);
  auto kind = value_kind_from_string(j.at("value_kind").get<std::string>());
  if (!kind) throw json::other_error::create(501, "unknown value_kind", &j);
  p.kind = *kind;
  p.min = j.value("min", 0.0);
  p.max = j.value("max", 0.0);
  p.choices = j.value("choices", std::vector<std::string>{});
}

void to_json(json& j, const NodeDescriptor& d) {
  j = json{{"node_id", d.node_id},
           {"node_type", std::string(to_string(d.node_type))},
           {"measurements", d.measurements},
           {"controls", d.controls}};
}

void from_json(const json& j, NodeDescriptor& d) {
  j.at("node_id").get_to(d.node_id);
  auto type = node_type_from_string(j.value("node_type", "other"));
  if (!type) throw json::other_error::create(501, "unknown node_type", &j);
  d.node_type = *type;
  d.measurements = j.value("measurements", std::vector<MetricSpec>{});
  d.controls = j.value("controls", std::vector<ParamSpec>{});
}

void to_json(json& j, const AppDescriptor& d) {
  j = json{{"app_id", d.app_id},
           {"required_measurements", d.required_measurements},
           {"controlled_params", d.controlled_params},
           {"priority", d.priority}};
}

void from_json(const json& j, AppDescriptor& d) {
  j.at("app_id").get_to(d.app_id);
  d.required_measurements =
      j.value("required_measurements", std::vector<std::pair<std::string, std::string>>{});
  d.controlled_params =
      j.value("controlled_params", std::vector<std::pair<std::string, std::string>>{});
  d.priority = j.value("priority", 0);
}

}  // namespace aicf

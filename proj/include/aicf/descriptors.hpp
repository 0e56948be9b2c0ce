#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace aicf {

using json = nlohmann::json;

enum class NodeType : std::uint8_t { PonOlt, PonOnu, RanDu, RanRu, Other };

std::string_view to_string(NodeType type);
std::optional<NodeType> node_type_from_string(std::string_view name);

/// One performance measurement a node exposes. period_ms == 0 means the
/// metric is event-driven rather than sampled.
struct MetricSpec {
  std::string name;
  std::string unit;
  std::uint32_t period_ms = 0;

  bool operator==(const MetricSpec&) const = default;
};

enum class ValueKind : std::uint8_t { Integer, Real, Enumerated };

std::string_view to_string(ValueKind kind);
std::optional<ValueKind> value_kind_from_string(std::string_view name);

/// One controllable parameter a node exposes.
struct ParamSpec {
  std::string name;
  ValueKind kind = ValueKind::Integer;
  double min = 0.0;
  double max = 0.0;
  std::vector<std::string> choices;

  /// True iff `value` is admissible for this parameter.
  bool admits(const json& value) const;

  bool operator==(const ParamSpec&) const = default;
};

struct NodeDescriptor {
  std::string node_id;
  NodeType node_type = NodeType::Other;
  std::vector<MetricSpec> measurements;
  std::vector<ParamSpec> controls;

  const MetricSpec* find_metric(std::string_view name) const;
  const ParamSpec* find_control(std::string_view name) const;
  std::optional<std::string> validate() const;

  bool operator==(const NodeDescriptor&) const = default;
};

struct AppDescriptor {
  std::string app_id;
  std::vector<std::pair<std::string, std::string>> required_measurements;  // (node, metric)
  std::vector<std::pair<std::string, std::string>> controlled_params;      // (node, param)
  int priority = 0;

  std::optional<std::string> validate() const;

  bool operator==(const AppDescriptor&) const = default;
};

/// `node/<id>/pm/<metric>` for each measurement followed by
/// `node/<id>/ctrl/<param>` for each control, in descriptor order.
std::vector<std::string> canonical_topics(const NodeDescriptor& descriptor);

std::string pm_topic(std::string_view node_id, std::string_view metric);
std::string ctrl_topic(std::string_view node_id, std::string_view param);

void to_json(json& j, const MetricSpec& m);
void from_json(const json& j, MetricSpec& m);
void to_json(json& j, const ParamSpec& p);
void from_json(const json& j, ParamSpec& p);
void to_json(json& j, const NodeDescriptor& d);
void from_json(const json& j, NodeDescriptor& d);
void to_json(json& j, const AppDescriptor& d);
void from_json(const json& j, AppDescriptor& d);

}  // namespace aicf

#include "aicf/envelope.hpp"

#include <array>

#include "aicf/topic.hpp"

namespace aicf {

namespace {

struct TypeName {
  MsgType type;
  std::string_view name;
};

constexpr std::array<TypeName, 10> kTypeNames = {{
    {MsgType::RegisterNode, "REGISTER_NODE"},
    {MsgType::RegisterApp, "REGISTER_APP"},
    {MsgType::RegisterAck, "REGISTER_ACK"},
    {MsgType::Deregister, "DEREGISTER"},
    {MsgType::Subscribe, "SUBSCRIBE"},
    {MsgType::Unsubscribe, "UNSUBSCRIBE"},
    {MsgType::Publish, "PUBLISH"},
    {MsgType::Exception, "EXCEPTION"},
    {MsgType::InterAi, "INTER_AI"},
    {MsgType::Heartbeat, "HEARTBEAT"},
}};

}  // namespace

std::string_view to_wire_name(MsgType type) {
  for (const auto& entry : kTypeNames) {
    if (entry.type == type) return entry.name;
  }
  return "UNKNOWN";
}

std::optional<MsgType> msg_type_from_wire(std::string_view name) {
  for (const auto& entry : kTypeNames) {
    if (entry.name == name) return entry.type;
  }
  return std::nullopt;
}

bool topic_required(MsgType type) {
  return type == MsgType::Subscribe || type == MsgType::Unsubscribe || type == MsgType::Publish;
}

std::optional<std::string> validate_envelope(const Envelope& env) {
  if (env.version != kProtocolVersion) return "version must be " + std::to_string(kProtocolVersion);
  if (env.sender.empty()) return "sender must be non-empty";
  if (topic_required(env.type)) {
    if (!env.topic) return std::string("topic required for ") + std::string(to_wire_name(env.type));
    if (env.type == MsgType::Publish) {
      if (!is_literal_topic(*env.topic)) return "PUBLISH topic must be a literal topic";
    } else if (!TopicFilter::try_parse(*env.topic)) {
      return "invalid topic filter: " + *env.topic;
    }
  } else if (env.topic) {
    return std::string("topic not allowed for ") + std::string(to_wire_name(env.type));
  }
  if (!env.payload.is_object()) return "payload must be an object";
  return std::nullopt;
}

}  // namespace aicf

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace aicf {

using json = nlohmann::json;

inline constexpr int kProtocolVersion = 1;

/// Message types carried on the wire. REGISTER_*, DEREGISTER and EXCEPTION
/// ride reserved routing topics derived from the payload (see docs/wire.md);
/// SUBSCRIBE/UNSUBSCRIBE/PUBLISH carry an explicit topic.
enum class MsgType : std::uint8_t {
  RegisterNode,
  RegisterApp,
  RegisterAck,
  Deregister,
  Subscribe,
  Unsubscribe,
  Publish,
  Exception,
  InterAi,
  Heartbeat,
};

std::string_view to_wire_name(MsgType type);
std::optional<MsgType> msg_type_from_wire(std::string_view name);

/// True for the message types whose envelope must carry a topic.
bool topic_required(MsgType type);

/// The framed wire unit for all north-south and east-west traffic.
struct Envelope {
  int version = kProtocolVersion;
  MsgType type = MsgType::Heartbeat;
  std::string sender;
  std::optional<std::string> topic;
  std::uint64_t ts_us = 0;
  std::uint64_t seq = 0;
  json payload = json::object();

  bool operator==(const Envelope&) const = default;
};

/// Returns an error description if the envelope violates its invariants.
std::optional<std::string> validate_envelope(const Envelope& env);

}  // namespace aicf

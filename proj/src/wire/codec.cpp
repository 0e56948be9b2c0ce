#include "aicf/codec.hpp"

#include <cstring>

namespace aicf {

namespace {

using ordered_json = nlohmann::ordered_json;

void put_be32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

std::uint32_t get_be32(std::string_view buf) {
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[0])) << 24) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[1])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[2])) << 8) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(buf[3]));
}

DecodeResult fail(CodecStatus status, std::size_t consumed, std::string detail) {
  DecodeResult r;
  r.status = status;
  r.consumed = consumed;
  r.detail = std::move(detail);
  return r;
}

}  // namespace

std::string encode_frame(const Envelope& env) {
  if (auto err = validate_envelope(env)) {
    throw CodecError(CodecError::Code::Invalid, *err);
  }
  ordered_json doc;
  doc["v"] = env.version;
  doc["type"] = to_wire_name(env.type);
  doc["sender"] = env.sender;
  if (env.topic) doc["topic"] = *env.topic;
  doc["ts_us"] = env.ts_us;
  doc["seq"] = env.seq;
  doc["payload"] = env.payload;  // plain json keeps payload keys sorted
  std::string body = doc.dump();
  if (body.size() > kMaxFrameBody) {
    throw CodecError(CodecError::Code::Oversize,
                     "frame body " + std::to_string(body.size()) + " exceeds " +
                         std::to_string(kMaxFrameBody));
  }
  std::string out;
  out.reserve(body.size() + 4);
  put_be32(out, static_cast<std::uint32_t>(body.size()));
  out += body;
  return out;
}

DecodeResult decode_frame(std::string_view buf) {
  if (buf.size() < 4) return fail(CodecStatus::Truncated, 0, "need length prefix");
  const std::uint32_t body_len = get_be32(buf);
  if (body_len > kMaxFrameBody) {
    return fail(CodecStatus::Malformed, 4, "declared body length exceeds frame cap");
  }
  if (buf.size() < 4u + body_len) return fail(CodecStatus::Truncated, 0, "incomplete body");
  const std::size_t consumed = 4u + body_len;
  const std::string_view body = buf.substr(4, body_len);

  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    return fail(CodecStatus::Malformed, consumed, "body is not a JSON object");
  }

  DecodeResult r;
  r.consumed = consumed;
  try {
    Envelope env;
    env.version = doc.at("v").get<int>();
    const auto type_name = doc.at("type").get<std::string>();
    auto type = msg_type_from_wire(type_name);
    if (!type) return fail(CodecStatus::UnknownType, consumed, "unknown msg_type: " + type_name);
    env.type = *type;
    env.sender = doc.at("sender").get<std::string>();
    if (doc.contains("topic")) env.topic = doc.at("topic").get<std::string>();
    env.ts_us = doc.at("ts_us").get<std::uint64_t>();
    env.seq = doc.at("seq").get<std::uint64_t>();
    env.payload = doc.at("payload");
    if (auto err = validate_envelope(env)) {
      return fail(CodecStatus::Malformed, consumed, *err);
    }
    r.status = CodecStatus::Ok;
    r.envelope = std::move(env);
  } catch (const json::exception& e) {
    return fail(CodecStatus::Malformed, consumed, e.what());
  }
  return r;
}

}  // namespace aicf

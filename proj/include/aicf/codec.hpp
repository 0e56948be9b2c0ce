#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "aicf/envelope.hpp"

namespace aicf {

/// Maximum serialized body size (excluding the 4-byte length prefix).
inline constexpr std::size_t kMaxFrameBody = 1024 * 1024;

enum class CodecStatus : std::uint8_t {
  Ok,
  Truncated,    // need more bytes
  Malformed,    // structurally invalid
  UnknownType,  // unrecognized msg_type
};

class CodecError : public std::runtime_error {
 public:
  enum class Code { Oversize, Invalid };

  CodecError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

/// Frames the envelope as a 4-byte big-endian body length followed by the
/// canonical UTF-8 JSON body (fields in order v, type, sender, topic, ts_us,
/// seq, payload; topic omitted when absent). Throws CodecError on invariant
/// violations or when the body exceeds kMaxFrameBody.
std::string encode_frame(const Envelope& env);

struct DecodeResult {
  CodecStatus status = CodecStatus::Truncated;
  Envelope envelope;
  std::size_t consumed = 0;
  std::string detail;
};

/// Decodes the first frame in `buf`. Truncated means the caller must supply
/// more bytes; Malformed/UnknownType frames report `consumed` so a stream
/// reader can skip them.
DecodeResult decode_frame(std::string_view buf);

}  // namespace aicf

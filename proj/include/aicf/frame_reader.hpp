#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "aicf/codec.hpp"

namespace aicf {

/// Reassembles frames from a byte stream. For every complete frame the
/// callback receives the decode result plus the raw frame bytes (so brokers
/// can forward envelopes without re-encoding).
class FrameReader {
 public:
  using FrameFn =
      std::function<void(const DecodeResult&, const std::shared_ptr<const std::string>&)>;

  void feed(std::string_view bytes, const FrameFn& fn) {
    buf_.append(bytes);
    std::size_t offset = 0;
    while (true) {
      DecodeResult r = decode_frame(std::string_view(buf_).substr(offset));
      if (r.status == CodecStatus::Truncated) break;
      auto raw = std::make_shared<const std::string>(buf_.substr(offset, r.consumed));
      offset += r.consumed;
      fn(r, raw);
    }
    buf_.erase(0, offset);
  }

  std::size_t buffered() const { return buf_.size(); }

 private:
  std::string buf_;
};

}  // namespace aicf

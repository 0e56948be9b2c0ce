#pragma once

#include <random>
#include <string>
#include <vector>

#include "aicf/envelope.hpp"

namespace aicf::testutil {

/// Deterministic random envelopes/values for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t u64() { return rng_(); }
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : rng_() % n; }
  bool chance(double p) { return static_cast<double>(rng_() >> 11) * 0x1p-53 < p; }

  std::string identifier(std::size_t max_len = 10) {
    static constexpr char alphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789_-";
    std::size_t len = 1 + below(max_len);
    std::string out;
    for (std::size_t i = 0; i < len; ++i) out.push_back(alphabet[below(sizeof(alphabet) - 1)]);
    return out;
  }

  std::string literal_topic(std::size_t max_segments = 4) {
    std::size_t n = 1 + below(max_segments);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out += '/';
      out += identifier(6);
    }
    return out;
  }

  json value(int depth = 2) {
    switch (below(depth > 0 ? 6 : 4)) {
      case 0: return json(static_cast<std::int64_t>(u64() % 100000) - 50000);
      case 1: return json(static_cast<double>(below(1000)) / 8.0);
      case 2: return json(identifier(12));
      case 3: return json(chance(0.5));
      case 4: {
        json arr = json::array();
        std::size_t n = below(4);
        for (std::size_t i = 0; i < n; ++i) arr.push_back(value(depth - 1));
        return arr;
      }
      default: {
        json obj = json::object();
        std::size_t n = below(4);
        for (std::size_t i = 0; i < n; ++i) obj[identifier(6)] = value(depth - 1);
        return obj;
      }
    }
  }

  json payload() {
    json obj = json::object();
    std::size_t n = below(5);
    for (std::size_t i = 0; i < n; ++i) obj[identifier(8)] = value();
    return obj;
  }

  Envelope envelope() {
    static constexpr MsgType kTypes[] = {
        MsgType::RegisterNode, MsgType::RegisterApp, MsgType::RegisterAck, MsgType::Deregister,
        MsgType::Subscribe,    MsgType::Unsubscribe, MsgType::Publish,     MsgType::Exception,
        MsgType::InterAi,      MsgType::Heartbeat};
    Envelope env;
    env.type = kTypes[below(std::size(kTypes))];
    env.sender = identifier();
    env.ts_us = u64() % 2'000'000'000'000ull;
    env.seq = u64() % 1'000'000;
    env.payload = payload();
    if (topic_required(env.type)) {
      std::string topic = literal_topic();
      if (env.type != MsgType::Publish && chance(0.4)) topic += "/#";
      env.topic = topic;
    }
    return env;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace aicf::testutil

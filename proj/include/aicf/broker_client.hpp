#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <string>

#include "aicf/envelope.hpp"
#include "aicf/executor.hpp"
#include "aicf/frame_reader.hpp"
#include "aicf/transport.hpp"

namespace aicf {

struct BrokerClientOptions {
  std::uint64_t backoff_base_us = 200'000;  // 200 ms
  std::uint64_t backoff_cap_us = 5'000'000;  // 5 s
  bool reconnect = true;
};

/// Client side of a broker connection: dials (with exponential backoff),
/// sends the identifying hello, replays subscriptions after a reconnect and
/// stamps per-sender seq/ts on every outgoing envelope.
class BrokerClient : public std::enable_shared_from_this<BrokerClient> {
 public:
  BrokerClient(std::string client_id, std::string endpoint, Network& net, Executor& executor,
               BrokerClientOptions options = {});
  ~BrokerClient();

  void set_on_envelope(std::function<void(const Envelope&)> fn) { on_envelope_ = std::move(fn); }
  /// Invoked after the hello went out (and subscriptions were replayed).
  void set_on_connect(std::function<void()> fn) { on_connect_ = std::move(fn); }

  void start();
  void stop();
  bool connected() const { return connected_; }

  void subscribe(const std::string& filter);
  void unsubscribe(const std::string& filter);
  bool publish(const std::string& topic, json payload);
  /// Sends a non-topic message type (registration traffic, INTER_AI, ...).
  bool send(MsgType type, json payload);

  std::uint64_t next_req_id() { return next_req_id_++; }
  const std::string& id() const { return client_id_; }
  std::uint64_t dial_attempts() const { return dial_attempts_; }

 private:
  bool send_envelope(MsgType type, std::optional<std::string> topic, json payload);
  void dial_once();
  void schedule_redial();
  void handle_closed();

  std::string client_id_;
  std::string endpoint_;
  Network& net_;
  Executor& executor_;
  BrokerClientOptions options_;

  std::mutex mu_;
  std::shared_ptr<Stream> stream_;
  FrameReader reader_;
  std::set<std::string> subscriptions_;
  std::atomic<bool> connected_{false};
  std::atomic<bool> stopped_{false};
  std::uint64_t seq_ = 0;
  std::atomic<std::uint64_t> next_req_id_{1};
  std::uint64_t backoff_us_ = 0;
  std::uint64_t dial_attempts_ = 0;
  TimerId redial_timer_ = 0;

  std::function<void(const Envelope&)> on_envelope_;
  std::function<void()> on_connect_;
};

}  // namespace aicf

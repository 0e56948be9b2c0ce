#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "aicf/envelope.hpp"
#include "aicf/topic.hpp"
#include "aicf/transport.hpp"

namespace aicf {

enum class BrokerRole : std::uint8_t { NodeBroker, InterAiBroker };

std::string_view namespace_prefix(BrokerRole role);
std::optional<BrokerRole> broker_role_from_string(std::string_view name);

struct BrokerStats {
  std::uint64_t connected_clients = 0;
  std::uint64_t subscriptions = 0;
  std::uint64_t published_total = 0;
  std::uint64_t delivered_total = 0;
  std::uint64_t dropped_total = 0;
};

json to_json(const BrokerStats& stats);

/// Outbound side of one client session. offer() returns false when the
/// delivery queue is full; the broker counts that as a drop.
class DeliverySink {
 public:
  virtual ~DeliverySink() = default;
  virtual bool offer(const std::shared_ptr<const std::string>& frame) = 0;
  virtual void shutdown() = 0;
};

/// Transport-independent publish-subscribe engine. One instance backs the
/// Local/Node broker, another the Inter-AI broker; the role decides which
/// topic namespace is accepted. Reserved "register/..." topics ride the
/// node broker only.
class BrokerCore {
 public:
  BrokerCore(BrokerRole role, std::string broker_id);

  BrokerRole role() const { return role_; }
  const std::string& id() const { return broker_id_; }

  /// Binds a client id to a sink. A second attach with the same id replaces
  /// the previous session (its sink is shut down, subscriptions cleared).
  void attach(const std::string& client_id, std::shared_ptr<DeliverySink> sink);
  void detach(const std::string& client_id);
  /// Detach only while `sink` is still the client's current sink (a replaced
  /// session must not tear down its successor).
  void detach_if(const std::string& client_id, const std::shared_ptr<DeliverySink>& sink);
  bool has_client(const std::string& client_id) const;

  /// Routes one decoded envelope. `raw` is the original frame; matching
  /// subscribers receive exactly these bytes.
  void ingress(const std::string& client_id, const Envelope& env,
               const std::shared_ptr<const std::string>& raw);

  void set_clock(std::function<std::uint64_t()> clock) { clock_ = std::move(clock); }

  BrokerStats stats() const;
  std::string stats_line() const;

 private:
  struct Subscription {
    TopicFilter filter;
    std::uint64_t created_seq = 0;
  };
  struct Client {
    std::shared_ptr<DeliverySink> sink;
    std::map<std::string, Subscription> subs;  // keyed by filter text
  };

  bool topic_in_namespace(std::string_view first_segment) const;
  std::optional<std::string> routing_topic(const Envelope& env, std::string& error_code,
                                           std::string& error_detail) const;
  void route(const std::string& topic, const std::shared_ptr<const std::string>& raw);
  void reply_direct(const std::string& client_id, MsgType type, json payload);

  const BrokerRole role_;
  const std::string broker_id_;

  mutable std::shared_mutex mu_;
  std::map<std::string, Client> clients_;
  std::uint64_t sub_seq_ = 0;
  std::atomic<std::uint64_t> own_seq_{0};
  std::function<std::uint64_t()> clock_;

  std::atomic<std::uint64_t> published_total_{0};
  std::atomic<std::uint64_t> delivered_total_{0};
  std::atomic<std::uint64_t> dropped_total_{0};
};

/// Sink with a bounded queue drained by a dedicated writer thread; used for
/// real socket serving so a slow consumer cannot stall the router.
class ThreadedSink : public DeliverySink {
 public:
  ThreadedSink(std::shared_ptr<Stream> stream, std::size_t capacity);
  ~ThreadedSink() override;

  bool offer(const std::shared_ptr<const std::string>& frame) override;
  void shutdown() override;

 private:
  void drain();

  std::shared_ptr<Stream> stream_;
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  bool stop_ = false;
  std::thread writer_;
};

/// Sink that writes straight to the stream; used with the in-memory
/// transport where sends never block (the executor is the queue).
class DirectSink : public DeliverySink {
 public:
  explicit DirectSink(std::shared_ptr<Stream> stream) : stream_(std::move(stream)) {}
  bool offer(const std::shared_ptr<const std::string>& frame) override {
    return stream_->send(*frame);
  }
  void shutdown() override { stream_->close(); }

 private:
  std::shared_ptr<Stream> stream_;
};

}  // namespace aicf

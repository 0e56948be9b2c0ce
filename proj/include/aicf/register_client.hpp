#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>

#include "aicf/broker_client.hpp"
#include "aicf/register_service.hpp"
#include "aicf/registry.hpp"

namespace aicf {

/// Request/reply helper for talking to the Register over the broker.
/// Callers forward reply-topic envelopes into handle_reply(); responses are
/// correlated by req_id.
class RegisterClient {
 public:
  /// (ok, error when !ok, full ack payload when ok)
  using ResultFn = std::function<void(bool, const RegistryError&, const json&)>;
  using RevokedFn = std::function<void(const std::string& app_id, const std::string& node_id,
                                       const std::string& param)>;

  explicit RegisterClient(std::shared_ptr<BrokerClient> client) : client_(std::move(client)) {}

  /// Subscribes the reply topic. Call once before issuing requests.
  void begin() { client_->subscribe(register_reply_topic(client_->id())); }

  std::uint64_t register_node(const NodeDescriptor& descriptor, ResultFn fn);
  std::uint64_t register_app(const AppDescriptor& descriptor, ResultFn fn);
  std::uint64_t deregister(Registry::Kind kind, const std::string& id, ResultFn fn);
  std::uint64_t lookup(json query, ResultFn fn);

  /// Drops a pending request (used by retry loops before re-issuing).
  void abandon(std::uint64_t req_id);

  void set_on_revoked(RevokedFn fn) { on_revoked_ = std::move(fn); }

  /// Returns true when the envelope was a Register reply (consumed).
  bool handle_reply(const Envelope& env);

 private:
  std::uint64_t track(ResultFn fn);

  std::shared_ptr<BrokerClient> client_;
  std::mutex mu_;
  std::map<std::uint64_t, ResultFn> pending_;
  RevokedFn on_revoked_;
};

}  // namespace aicf

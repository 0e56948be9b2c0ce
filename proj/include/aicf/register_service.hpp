#pragma once

#include <memory>
#include <string>

#include "aicf/broker_client.hpp"
#include "aicf/registry.hpp"

namespace aicf {

/// Reserved topics the Register listens on (as a client of the node broker).
inline constexpr std::string_view kTopicRegisterNode = "register/node";
inline constexpr std::string_view kTopicRegisterApp = "register/app";
inline constexpr std::string_view kTopicDeregister = "register/deregister";
inline constexpr std::string_view kTopicLookup = "register/lookup";

std::string register_reply_topic(std::string_view client_id);

struct RegisterServiceOptions {
  std::string snapshot_path;  // empty: no persistence
};

/// Wire front of the Registry: consumes REGISTER_NODE / REGISTER_APP /
/// DEREGISTER envelopes plus `register/lookup` queries off the node broker,
/// answers on register/reply/<sender>, and pushes REVOKED notices to the
/// sessions that registered preempted apps.
class RegisterService {
 public:
  RegisterService(Registry& registry, std::shared_ptr<BrokerClient> client,
                  RegisterServiceOptions options = {});

  /// Installs handlers and subscribes; call before client->start().
  void start();

  Registry& registry() { return registry_; }

 private:
  void handle(const Envelope& env);
  void ack(const std::string& to, std::uint64_t req_id, json extra);
  void fail(const std::string& to, std::uint64_t req_id, const RegistryError& error);
  void notify_revocations(const std::vector<Revocation>& revocations);
  void persist();

  Registry& registry_;
  std::shared_ptr<BrokerClient> client_;
  RegisterServiceOptions options_;
};

}  // namespace aicf

#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "aicf/broker_client.hpp"
#include "aicf/envelope.hpp"
#include "aicf/executor.hpp"
#include "aicf/transport.hpp"

namespace aicf {

/// Adapter between INTER_AI envelopes and one foreign controller encoding.
/// Translators must be stateless per message; translate_in(translate_out(e))
/// must reproduce e for every supported envelope.
class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::string_view kind() const = 0;
  virtual std::optional<Envelope> translate_in(std::string_view foreign_frame) = 0;
  virtual std::optional<std::string> translate_out(const Envelope& env) = 0;
};

/// Reference foreign format "legacy-sdn-v0": one newline-terminated line,
///   LSDN0|<sender>|<ts_us>|<seq>|<base64 payload JSON>
/// exactly five "|"-separated fields.
class LegacySdnV0 : public Translator {
 public:
  static constexpr std::string_view kKind = "legacy-sdn-v0";

  std::string_view kind() const override { return kKind; }
  std::optional<Envelope> translate_in(std::string_view foreign_frame) override;
  std::optional<std::string> translate_out(const Envelope& env) override;
};

class TranslatorRegistry {
 public:
  void register_translator(std::shared_ptr<Translator> translator);
  std::shared_ptr<Translator> find(std::string_view kind) const;
  /// Registry preloaded with the translators this build ships.
  static TranslatorRegistry with_builtins();

 private:
  std::map<std::string, std::shared_ptr<Translator>, std::less<>> translators_;
};

/// Outbound leg to one non-native peer: translates INTER_AI envelopes and
/// writes the foreign frames to the peer endpoint (redialing with backoff).
class ForeignLink : public std::enable_shared_from_this<ForeignLink> {
 public:
  enum class SendStatus : std::uint8_t { Ok, Unreachable, TranslationFailed, UnsupportedType };

  ForeignLink(std::shared_ptr<Translator> translator, std::string endpoint, Network& net,
              Executor& executor, int max_dial_attempts = 5);

  void start();
  void stop();
  SendStatus send(const Envelope& env);

  bool connected() const { return connected_; }
  bool unreachable() const;
  std::uint64_t translation_failures() const { return translation_failures_; }

 private:
  void dial_once();
  void schedule_redial();

  std::shared_ptr<Translator> translator_;
  std::string endpoint_;
  Network& net_;
  Executor& executor_;
  int max_dial_attempts_;

  std::mutex mu_;
  std::shared_ptr<Stream> stream_;
  std::atomic<bool> connected_{false};
  std::atomic<bool> stopped_{false};
  int dial_attempts_ = 0;
  std::uint64_t backoff_us_ = 0;
  std::atomic<std::uint64_t> translation_failures_{0};
};

struct GatewayStats {
  std::uint64_t translated_in = 0;
  std::uint64_t failed = 0;
};

/// Inbound leg: listens on a dedicated endpoint for one foreign kind,
/// translates frames into INTER_AI envelopes and re-publishes them on the
/// local Inter-AI broker (sender preserved in payload "from").
class ForeignGateway {
 public:
  ForeignGateway(std::shared_ptr<Translator> translator, std::string listen_endpoint,
                 Network& net, std::shared_ptr<BrokerClient> interai_client,
                 std::string default_route_to);
  ~ForeignGateway();

  /// Throws BindError when the endpoint is taken.
  void start();
  void stop();

  GatewayStats stats() const;

 private:
  class Conn;
  void handle_line(std::string_view line);

  std::shared_ptr<Translator> translator_;
  std::string endpoint_;
  Network& net_;
  std::shared_ptr<BrokerClient> interai_client_;
  std::string default_route_to_;
  std::unique_ptr<Listener> listener_;

  mutable std::mutex mu_;
  GatewayStats stats_;
};

}  // namespace aicf

#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "aicf/broker_client.hpp"
#include "aicf/control_app.hpp"
#include "aicf/register_client.hpp"
#include "aicf/translate.hpp"

namespace aicf {

struct PeerLink {
  std::string peer_id;
  std::string endpoint;
  bool native = true;
  std::string kind;  // translator kind for non-native peers
};

struct EngineOptions {
  std::string engine_id = "engine";
  std::string node_broker_endpoint;
  std::string interai_broker_endpoint;  // own broker; empty disables east-west
  std::vector<PeerLink> peers;
  std::uint64_t callback_budget_us = 10'000;
  std::string state_dir;  // app kv persistence; empty keeps state in memory
  int peer_dial_retries = 5;
};

struct EngineStats {
  std::uint64_t controls_emitted = 0;
  std::uint64_t controls_blocked = 0;
  std::uint64_t measurements_dispatched = 0;
  std::uint64_t malformed_measurements = 0;
  std::uint64_t budget_overruns = 0;
  std::uint64_t interai_sent = 0;
  std::uint64_t interai_received = 0;
};

/// The AI-powered control engine: hosts ControlApps, registers them with
/// the Register, routes measurements in and control messages out, and
/// federates with peer controllers over the Inter-AI brokers.
class Engine {
 public:
  using LoadFn = std::function<void(bool, const RegistryError&)>;

  Engine(EngineOptions options, Network& net, Executor& executor);
  ~Engine();

  void start();
  void stop();

  /// Registers the app and, on success, subscribes its measurements, calls
  /// on_start and begins ticking. On failure the app never starts and the
  /// Register's exception is surfaced verbatim.
  void load_app(std::shared_ptr<ControlApp> app, LoadFn done);
  void unload_app(const std::string& app_id, LoadFn done);

  enum class AppState : std::uint8_t { Loading, Running, Stopped };
  std::optional<AppState> app_state(const std::string& app_id) const;

  /// Active pm-topic subscriptions (exactly the union of running apps'
  /// required measurement topics).
  std::set<std::string> pm_subscriptions() const;

  EngineStats stats() const;
  const std::string& id() const { return options_.engine_id; }
  BrokerClient& node_client() { return *node_client_; }

  /// Translator call counting hook for federation tests.
  std::shared_ptr<ForeignLink> foreign_link(const std::string& peer_id) const;

 private:
  struct AppRec;
  class CtxImpl;
  struct Peer {
    PeerLink link;
    std::shared_ptr<BrokerClient> client;      // native
    std::shared_ptr<ForeignLink> foreign;      // non-native
  };

  void dispatch_node_envelope(const Envelope& env);
  void dispatch_interai_envelope(const Envelope& env);
  void dispatch_measurement(const std::string& node_id, const std::string& metric,
                            const Envelope& env);
  void handle_revoked(const std::string& app_id, const std::string& node_id,
                      const std::string& param);
  void run_callback(AppRec& rec, const char* what, const std::function<void(EngineContext&)>& fn);
  void schedule_tick(const std::shared_ptr<AppRec>& rec);
  void add_subscriptions(const std::vector<std::string>& topics);
  void drop_subscriptions(const std::vector<std::string>& topics);
  EngineContext::EmitStatus emit_control(AppRec& rec, const std::string& node_id,
                                         const std::string& param, const json& value);
  EngineContext::SendStatus send_interai(const std::string& peer_id, json payload);
  void load_kv(AppRec& rec);
  void save_kv(AppRec& rec);

  EngineOptions options_;
  Network& net_;
  Executor& executor_;

  std::shared_ptr<BrokerClient> node_client_;
  std::shared_ptr<BrokerClient> interai_client_;
  std::unique_ptr<RegisterClient> register_client_;
  std::map<std::string, Peer> peers_;
  TranslatorRegistry translators_ = TranslatorRegistry::with_builtins();

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<AppRec>> apps_;
  std::map<std::string, int> sub_refcount_;  // pm topic -> requiring apps

  mutable std::mutex stats_mu_;
  EngineStats stats_;
  bool started_ = false;
};

}  // namespace aicf

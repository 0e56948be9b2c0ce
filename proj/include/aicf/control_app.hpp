#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "aicf/descriptors.hpp"
#include "aicf/errors.hpp"

namespace aicf {

/// Surface through which a control application touches the world. Valid only
/// inside app callbacks; the engine serializes all callbacks per app.
class EngineContext {
 public:
  enum class EmitStatus : std::uint8_t { Ok, NotClaimed, OutOfRange, NotRunning };
  enum class SendStatus : std::uint8_t { Ok, UnknownPeer, Unreachable };
  using LookupFn = std::function<void(bool, const RegistryError&, const json&)>;

  virtual ~EngineContext() = default;

  /// Publishes a control message. Allowed only for params this app holds
  /// claims on; the value is range-checked against the param's spec.
  virtual EmitStatus emit_control(const std::string& node_id, const std::string& param,
                                  const json& value) = 0;
  virtual SendStatus send_interai(const std::string& peer_controller_id, json payload) = 0;
  /// Asynchronous Register lookup; the callback runs serialized with the
  /// app's other callbacks.
  virtual void query_register(json query, LookupFn fn) = 0;
  virtual std::uint64_t now_us() = 0;

  // App-local durable key-value store.
  virtual json kv_get(const std::string& key) = 0;
  virtual void kv_put(const std::string& key, json value) = 0;

  virtual const std::string& controller_id() const = 0;
};

/// Behavioral contract for control applications hosted by the engine.
/// Callbacks must return quickly (the engine accounts overruns against a
/// configured budget) and may interact with the world only through ctx.
class ControlApp {
 public:
  virtual ~ControlApp() = default;

  virtual const AppDescriptor& descriptor() const = 0;
  /// Tick period in microseconds; 0 disables on_tick.
  virtual std::uint64_t tick_period_us() const { return 100'000; }

  virtual void on_start(EngineContext&) {}
  virtual void on_measurement(EngineContext&, const std::string& node_id,
                              const std::string& metric, const json& value,
                              std::uint64_t ts_us) {
    (void)node_id;
    (void)metric;
    (void)value;
    (void)ts_us;
  }
  virtual void on_tick(EngineContext&, std::uint64_t now_us) { (void)now_us; }
  virtual void on_interai(EngineContext&, const std::string& peer_id, const json& payload) {
    (void)peer_id;
    (void)payload;
  }
  virtual void on_revoked(EngineContext&, const std::string& node_id, const std::string& param) {
    (void)node_id;
    (void)param;
  }
  virtual void on_stop(EngineContext&) {}
};

}  // namespace aicf

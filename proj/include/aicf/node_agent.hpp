#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include "aicf/broker_client.hpp"
#include "aicf/descriptors.hpp"
#include "aicf/register_client.hpp"

namespace aicf {

/// Node-local binding for one controllable parameter. Returning false
/// reports the control as rejected even though it validated.
using ApplyHook = std::function<bool(const std::string& param, const json& value)>;
/// Produces the current value for a periodic metric.
using MetricSampler = std::function<json(const std::string& metric)>;

struct AgentConfig {
  NodeDescriptor descriptor;
  std::string broker_endpoint;
  std::map<std::string, std::uint32_t> publish_periods_ms;  // per-metric override
  std::map<std::string, ApplyHook> apply_hooks;
  MetricSampler sampler;                      // nullptr: metrics publish 0
  std::uint64_t register_timeout_us = 1'000'000;
  std::uint64_t register_backoff_base_us = 200'000;
  std::uint64_t register_backoff_cap_us = 5'000'000;
};

struct AgentStats {
  std::uint64_t published = 0;
  std::uint64_t applied = 0;
  std::uint64_t rejected = 0;
  std::uint64_t register_attempts = 0;
};

/// The Node Control Module: registers the node, publishes its measurements
/// and applies control messages received on node/<id>/ctrl/#. Every control
/// outcome is reported on the synthetic __applied/__rejected metrics (the
/// agent adds them to the descriptor).
class NodeAgent {
 public:
  /// Throws std::invalid_argument on a malformed config (bad descriptor,
  /// apply hook or period override for an unknown name).
  NodeAgent(AgentConfig config, Network& net, Executor& executor);
  ~NodeAgent();

  void start();
  void stop();

  bool registered() const { return registered_; }
  const NodeDescriptor& descriptor() const { return config_.descriptor; }

  /// Publishes one measurement now. Returns false (UNKNOWN_METRIC) when the
  /// metric is not in the descriptor.
  bool publish_measurement(const std::string& metric, const json& value);

  AgentStats stats() const;
  BrokerClient& client() { return *client_; }

 private:
  void attempt_register();
  void schedule_register_retry();
  void start_metric_timers();
  void publish_and_reschedule(const std::string& metric, std::uint64_t period_us);
  void handle_envelope(const Envelope& env);
  void apply_control(const Envelope& env);

  AgentConfig config_;
  Executor& executor_;
  std::shared_ptr<BrokerClient> client_;
  std::unique_ptr<RegisterClient> register_client_;

  std::atomic<bool> registered_{false};
  std::atomic<bool> stopped_{false};
  std::uint64_t pending_req_ = 0;
  TimerId retry_timer_ = 0;
  std::uint64_t backoff_us_ = 0;
  std::map<std::string, TimerId> metric_timers_;  // metric -> next fire
  bool timers_running_ = false;

  mutable std::mutex stats_mu_;
  AgentStats stats_;
};

}  // namespace aicf

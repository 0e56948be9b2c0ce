#include "aicf/node_agent.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "aicf/topic.hpp"

namespace aicf {

namespace {

constexpr std::string_view kAppliedMetric = "__applied";
constexpr std::string_view kRejectedMetric = "__rejected";

}  // namespace

NodeAgent::NodeAgent(AgentConfig config, Network& net, Executor& executor)
    : config_(std::move(config)), executor_(executor) {
  // The confirmation stream rides ordinary measurements; make sure the
  // descriptor exposes it.
  for (auto name : {kAppliedMetric, kRejectedMetric}) {
    if (!config_.descriptor.find_metric(name)) {
      config_.descriptor.measurements.push_back({std::string(name), "event", 0});
    }
  }
  if (auto err = config_.descriptor.validate()) {
    throw std::invalid_argument("agent config: " + *err);
  }
  for (const auto& [param, hook] : config_.apply_hooks) {
    if (!config_.descriptor.find_control(param)) {
      throw std::invalid_argument("agent config: apply_hook for unknown param '" + param + "'");
    }
  }
  for (const auto& [metric, period] : config_.publish_periods_ms) {
    if (!config_.descriptor.find_metric(metric)) {
      throw std::invalid_argument("agent config: period override for unknown metric '" + metric +
                                  "'");
    }
  }

  BrokerClientOptions opts;
  opts.backoff_base_us = config_.register_backoff_base_us;
  opts.backoff_cap_us = config_.register_backoff_cap_us;
  client_ = std::make_shared<BrokerClient>(config_.descriptor.node_id, config_.broker_endpoint,
                                           net, executor_, opts);
  register_client_ = std::make_unique<RegisterClient>(client_);
}

NodeAgent::~NodeAgent() { stop(); }

void NodeAgent::start() {
  stopped_ = false;
  client_->set_on_envelope([this](const Envelope& env) { handle_envelope(env); });
  client_->set_on_connect([this] { attempt_register(); });
  register_client_->begin();
  client_->subscribe("node/" + config_.descriptor.node_id + "/ctrl/#");
  client_->start();
}

void NodeAgent::stop() {
  if (stopped_.exchange(true)) return;
  if (retry_timer_ != 0) executor_.cancel(retry_timer_);
  for (auto& [metric, id] : metric_timers_) executor_.cancel(id);
  metric_timers_.clear();
  client_->stop();
}

void NodeAgent::attempt_register() {
  if (stopped_ || registered_) return;
  if (pending_req_ != 0) register_client_->abandon(pending_req_);
  {
    std::lock_guard lk(stats_mu_);
    ++stats_.register_attempts;
  }
  pending_req_ = register_client_->register_node(
      config_.descriptor, [this](bool ok, const RegistryError& err, const json&) {
        pending_req_ = 0;
        if (stopped_) return;
        if (!ok) {
          spdlog::warn("agent {}: registration rejected: {}", config_.descriptor.node_id,
                       err.detail);
          schedule_register_retry();
          return;
        }
        if (retry_timer_ != 0) {
          executor_.cancel(retry_timer_);
          retry_timer_ = 0;
        }
        registered_ = true;
        spdlog::info("agent {}: registered", config_.descriptor.node_id);
        start_metric_timers();
      });
  // No reply within the timeout: retry with backoff until acked.
  if (retry_timer_ != 0) executor_.cancel(retry_timer_);
  retry_timer_ = executor_.schedule(config_.register_timeout_us, [this] {
    retry_timer_ = 0;
    if (!registered_ && !stopped_) schedule_register_retry();
  });
}

void NodeAgent::schedule_register_retry() {
  if (stopped_ || registered_) return;
  backoff_us_ = backoff_us_ == 0
                    ? config_.register_backoff_base_us
                    : std::min(backoff_us_ * 2, config_.register_backoff_cap_us);
  if (retry_timer_ != 0) executor_.cancel(retry_timer_);
  retry_timer_ = executor_.schedule(backoff_us_, [this] {
    retry_timer_ = 0;
    if (client_->connected()) attempt_register();
  });
}

void NodeAgent::start_metric_timers() {
  if (timers_running_) return;
  timers_running_ = true;
  for (const auto& metric : config_.descriptor.measurements) {
    std::uint32_t period_ms = metric.period_ms;
    auto override_it = config_.publish_periods_ms.find(metric.name);
    if (override_it != config_.publish_periods_ms.end()) period_ms = override_it->second;
    if (period_ms == 0) continue;  // event-driven
    const std::uint64_t period_us = static_cast<std::uint64_t>(period_ms) * 1000;
    const std::string name = metric.name;
    // First sample one period from now, then steady.
    metric_timers_[name] = executor_.schedule(period_us, [this, name, period_us] {
      publish_and_reschedule(name, period_us);
    });
  }
}

void NodeAgent::publish_and_reschedule(const std::string& metric, std::uint64_t period_us) {
  if (stopped_ || !registered_) return;
  publish_measurement(metric, config_.sampler ? config_.sampler(metric) : json(0));
  metric_timers_[metric] = executor_.schedule(period_us, [this, metric, period_us] {
    publish_and_reschedule(metric, period_us);
  });
}

bool NodeAgent::publish_measurement(const std::string& metric, const json& value) {
  const MetricSpec* spec = config_.descriptor.find_metric(metric);
  if (!spec) return false;
  client_->publish(pm_topic(config_.descriptor.node_id, metric),
                   json{{"metric", metric}, {"value", value}, {"unit", spec->unit}});
  std::lock_guard lk(stats_mu_);
  ++stats_.published;
  return true;
}

void NodeAgent::handle_envelope(const Envelope& env) {
  if (register_client_->handle_reply(env)) return;
  if (env.type == MsgType::Publish && env.topic) {
    auto segs = split_topic(*env.topic);
    if (segs && segs->size() == 4 && (*segs)[0] == "node" &&
        (*segs)[1] == config_.descriptor.node_id && (*segs)[2] == "ctrl") {
      apply_control(env);
    }
  }
}

void NodeAgent::apply_control(const Envelope& env) {
  auto segs = split_topic(*env.topic);
  const std::string& param = (*segs)[3];
  const json value = env.payload.contains("value") ? env.payload.at("value") : json();
  const std::string src_app = env.payload.value("app_id", env.sender);

  auto reject = [&](const std::string& reason) {
    {
      std::lock_guard lk(stats_mu_);
      ++stats_.rejected;
    }
    spdlog::debug("agent {}: rejected {}={} from {}: {}", config_.descriptor.node_id, param,
                  value.dump(), src_app, reason);
    publish_measurement(std::string(kRejectedMetric),
                        json{{"param", param}, {"value", value}, {"src_app", src_app},
                             {"reason", reason}});
  };

  const ParamSpec* spec = config_.descriptor.find_control(param);
  if (!spec) return reject("unknown param");
  if (!spec->admits(value)) return reject("out of range");
  auto hook = config_.apply_hooks.find(param);
  if (hook != config_.apply_hooks.end() && !hook->second(param, value)) {
    return reject("hook refused");
  }
  {
    std::lock_guard lk(stats_mu_);
    ++stats_.applied;
  }
  publish_measurement(std::string(kAppliedMetric),
                      json{{"param", param}, {"value", value}, {"src_app", src_app}});
}

AgentStats NodeAgent::stats() const {
  std::lock_guard lk(stats_mu_);
  return stats_;
}

}  // namespace aicf

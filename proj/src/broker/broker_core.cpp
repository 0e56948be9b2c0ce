#include "aicf/broker.hpp"

#include <spdlog/spdlog.h>

#include "aicf/codec.hpp"

namespace aicf {

std::string_view namespace_prefix(BrokerRole role) {
  return role == BrokerRole::NodeBroker ? "node" : "interai";
}

std::optional<BrokerRole> broker_role_from_string(std::string_view name) {
  if (name == "node" || name == "node_broker") return BrokerRole::NodeBroker;
  if (name == "interai" || name == "inter_ai_broker") return BrokerRole::InterAiBroker;
  return std::nullopt;
}

json to_json(const BrokerStats& stats) {
  return json{{"connected_clients", stats.connected_clients},
              {"subscriptions", stats.subscriptions},
              {"published_total", stats.published_total},
              {"delivered_total", stats.delivered_total},
              {"dropped_total", stats.dropped_total}};
}

BrokerCore::BrokerCore(BrokerRole role, std::string broker_id)
    : role_(role), broker_id_(std::move(broker_id)) {}

void BrokerCore::attach(const std::string& client_id, std::shared_ptr<DeliverySink> sink) {
  std::shared_ptr<DeliverySink> replaced;
  {
    std::unique_lock lk(mu_);
    auto it = clients_.find(client_id);
    if (it != clients_.end()) {
      replaced = it->second.sink;
      clients_.erase(it);
    }
    clients_[client_id].sink = std::move(sink);
  }
  if (replaced) {
    spdlog::info("broker {}: client {} replaced by a new connection", broker_id_, client_id);
    replaced->shutdown();
  }
}

void BrokerCore::detach(const std::string& client_id) {
  std::unique_lock lk(mu_);
  clients_.erase(client_id);
}

void BrokerCore::detach_if(const std::string& client_id,
                           const std::shared_ptr<DeliverySink>& sink) {
  std::unique_lock lk(mu_);
  auto it = clients_.find(client_id);
  if (it != clients_.end() && it->second.sink == sink) clients_.erase(it);
}

bool BrokerCore::has_client(const std::string& client_id) const {
  std::shared_lock lk(mu_);
  return clients_.count(client_id) > 0;
}

bool BrokerCore::topic_in_namespace(std::string_view first_segment) const {
  if (first_segment == namespace_prefix(role_)) return true;
  return role_ == BrokerRole::NodeBroker && first_segment == "register";
}

std::optional<std::string> BrokerCore::routing_topic(const Envelope& env, std::string& error_code,
                                                     std::string& error_detail) const {
  auto need_to = [&](const char* where) -> std::optional<std::string> {
    if (!env.payload.contains("to") || !env.payload["to"].is_string() ||
        env.payload["to"].get_ref<const std::string&>().empty()) {
      error_code = "MALFORMED";
      error_detail = std::string(where) + " payload requires a 'to' field";
      return std::nullopt;
    }
    return env.payload["to"].get<std::string>();
  };

  switch (env.type) {
    case MsgType::Publish:
      return env.topic;
    case MsgType::RegisterNode:
      return "register/node";
    case MsgType::RegisterApp:
      return "register/app";
    case MsgType::Deregister:
      return "register/deregister";
    case MsgType::RegisterAck:
    case MsgType::Exception: {
      auto to = need_to(env.type == MsgType::RegisterAck ? "REGISTER_ACK" : "EXCEPTION");
      if (!to) return std::nullopt;
      return "register/reply/" + *to;
    }
    case MsgType::InterAi: {
      auto to = need_to("INTER_AI");
      if (!to) return std::nullopt;
      return "interai/" + *to + "/inbox";
    }
    default:
      return std::nullopt;  // HEARTBEAT and subscription control: not routed
  }
}

void BrokerCore::ingress(const std::string& client_id, const Envelope& env,
                         const std::shared_ptr<const std::string>& raw) {
  switch (env.type) {
    case MsgType::Subscribe:
    case MsgType::Unsubscribe: {
      auto filter = TopicFilter::try_parse(*env.topic);
      if (!filter) {
        reply_direct(client_id, MsgType::Exception,
                     json{{"code", "MALFORMED"}, {"detail", "bad topic filter: " + *env.topic}});
        return;
      }
      if (filter->first_literal().empty() || !topic_in_namespace(filter->first_literal())) {
        reply_direct(client_id, MsgType::Exception,
                     json{{"code", "WRONG_NAMESPACE"},
                          {"detail", "filter '" + *env.topic + "' not allowed on " +
                                         std::string(namespace_prefix(role_)) + " broker"}});
        return;
      }
      std::unique_lock lk(mu_);
      auto it = clients_.find(client_id);
      if (it == clients_.end()) return;
      if (env.type == MsgType::Subscribe) {
        // Duplicate subscriptions are idempotent.
        it->second.subs.emplace(filter->str(), Subscription{*filter, ++sub_seq_});
      } else {
        it->second.subs.erase(filter->str());
      }
      return;
    }
    case MsgType::Heartbeat: {
      if (env.payload.value("cmd", std::string()) == "stats") {
        reply_direct(client_id, MsgType::Heartbeat, json{{"stats", to_json(stats())}});
      }
      return;
    }
    default:
      break;
  }

  std::string error_code;
  std::string error_detail;
  auto topic = routing_topic(env, error_code, error_detail);
  if (!topic) {
    if (!error_code.empty()) {
      reply_direct(client_id, MsgType::Exception,
                   json{{"code", error_code}, {"detail", error_detail}});
    }
    return;
  }
  auto segs = split_topic(*topic);
  if (!segs || !topic_in_namespace((*segs)[0])) {
    reply_direct(client_id, MsgType::Exception,
                 json{{"code", "WRONG_NAMESPACE"},
                      {"detail", "topic '" + *topic + "' not allowed on " +
                                     std::string(namespace_prefix(role_)) + " broker"}});
    return;
  }
  route(*topic, raw);
}

void BrokerCore::route(const std::string& topic, const std::shared_ptr<const std::string>& raw) {
  std::shared_lock lk(mu_);
  ++published_total_;
  for (auto& [id, client] : clients_) {
    bool match = false;
    for (const auto& [text, sub] : client.subs) {
      if (sub.filter.matches(topic)) {
        match = true;
        break;
      }
    }
    if (!match) continue;
    if (client.sink->offer(raw)) {
      ++delivered_total_;
    } else {
      ++dropped_total_;
    }
  }
}

void BrokerCore::reply_direct(const std::string& client_id, MsgType type, json payload) {
  std::shared_ptr<DeliverySink> sink;
  {
    std::shared_lock lk(mu_);
    auto it = clients_.find(client_id);
    if (it == clients_.end()) return;
    sink = it->second.sink;
  }
  Envelope env;
  env.type = type;
  env.sender = broker_id_;
  env.ts_us = clock_ ? clock_() : 0;
  env.seq = own_seq_++;
  env.payload = std::move(payload);
  auto frame = std::make_shared<const std::string>(encode_frame(env));
  sink->offer(frame);
}

BrokerStats BrokerCore::stats() const {
  std::shared_lock lk(mu_);
  BrokerStats s;
  s.connected_clients = clients_.size();
  for (const auto& [id, client] : clients_) s.subscriptions += client.subs.size();
  s.published_total = published_total_;
  s.delivered_total = delivered_total_;
  s.dropped_total = dropped_total_;
  return s;
}

std::string BrokerCore::stats_line() const { return to_json(stats()).dump(); }

ThreadedSink::ThreadedSink(std::shared_ptr<Stream> stream, std::size_t capacity)
    : stream_(std::move(stream)), capacity_(capacity), writer_([this] { drain(); }) {}

ThreadedSink::~ThreadedSink() {
  shutdown();
  if (writer_.joinable()) writer_.join();
}

bool ThreadedSink::offer(const std::shared_ptr<const std::string>& frame) {
  {
    std::lock_guard lk(mu_);
    if (stop_) return false;
    if (queue_.size() >= capacity_) return false;
    queue_.push_back(frame);
  }
  cv_.notify_one();
  return true;
}

void ThreadedSink::shutdown() {
  {
    std::lock_guard lk(mu_);
    if (stop_) return;
    stop_ = true;
  }
  cv_.notify_all();
  stream_->close();
}

void ThreadedSink::drain() {
  std::unique_lock lk(mu_);
  while (true) {
    cv_.wait(lk, [this] { return stop_ || !queue_.empty(); });
    if (stop_ && queue_.empty()) return;
    auto frame = std::move(queue_.front());
    queue_.pop_front();
    lk.unlock();
    stream_->send(*frame);
    lk.lock();
  }
}

}  // namespace aicf

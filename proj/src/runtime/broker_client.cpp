#include "aicf/broker_client.hpp"

#include <algorithm>
#include <vector>

#include <spdlog/spdlog.h>

namespace aicf {

BrokerClient::BrokerClient(std::string client_id, std::string endpoint, Network& net,
                           Executor& executor, BrokerClientOptions options)
    : client_id_(std::move(client_id)),
      endpoint_(std::move(endpoint)),
      net_(net),
      executor_(executor),
      options_(options) {}

BrokerClient::~BrokerClient() { stop(); }

void BrokerClient::start() {
  stopped_ = false;
  dial_once();
}

void BrokerClient::stop() {
  stopped_ = true;
  std::shared_ptr<Stream> stream;
  {
    std::lock_guard lk(mu_);
    stream = std::move(stream_);
    if (redial_timer_ != 0) {
      executor_.cancel(redial_timer_);
      redial_timer_ = 0;
    }
  }
  connected_ = false;
  if (stream) stream->close();
}

void BrokerClient::dial_once() {
  if (stopped_) return;
  ++dial_attempts_;
  auto stream = net_.dial(endpoint_);
  if (!stream) {
    schedule_redial();
    return;
  }
  {
    std::lock_guard lk(mu_);
    stream_ = stream;
    reader_ = FrameReader();
  }
  auto self = shared_from_this();
  stream->start(
      [self](std::string_view bytes) {
        std::vector<Envelope> ready;
        {
          std::lock_guard lk(self->mu_);
          self->reader_.feed(bytes, [&](const DecodeResult& r, const auto&) {
            if (r.status == CodecStatus::Ok) {
              ready.push_back(r.envelope);
            } else {
              spdlog::warn("client {}: dropping bad frame: {}", self->client_id_, r.detail);
            }
          });
        }
        for (auto& env : ready) {
          if (self->on_envelope_) self->on_envelope_(env);
        }
      },
      [self] { self->handle_closed(); });

  connected_ = true;
  backoff_us_ = 0;
  send_envelope(MsgType::Heartbeat, std::nullopt, json::object());
  std::set<std::string> subs;
  {
    std::lock_guard lk(mu_);
    subs = subscriptions_;
  }
  for (const auto& filter : subs) {
    send_envelope(MsgType::Subscribe, filter, json::object());
  }
  if (on_connect_) on_connect_();
}

void BrokerClient::schedule_redial() {
  if (stopped_ || !options_.reconnect) return;
  backoff_us_ = backoff_us_ == 0 ? options_.backoff_base_us
                                 : std::min(backoff_us_ * 2, options_.backoff_cap_us);
  auto self = shared_from_this();
  std::lock_guard lk(mu_);
  redial_timer_ = executor_.schedule(backoff_us_, [self] {
    {
      std::lock_guard lk2(self->mu_);
      self->redial_timer_ = 0;
    }
    self->dial_once();
  });
}

void BrokerClient::handle_closed() {
  if (stopped_) return;
  connected_ = false;
  {
    std::lock_guard lk(mu_);
    stream_.reset();
  }
  spdlog::debug("client {}: connection closed", client_id_);
  schedule_redial();
}

bool BrokerClient::send_envelope(MsgType type, std::optional<std::string> topic, json payload) {
  // seq stamping and the send must stay under one lock so seq order matches
  // wire order.
  std::lock_guard lk(mu_);
  if (!stream_) return false;
  Envelope env;
  env.type = type;
  env.sender = client_id_;
  env.topic = std::move(topic);
  env.ts_us = executor_.now_us();
  env.seq = seq_++;
  env.payload = std::move(payload);
  return stream_->send(encode_frame(env));
}

void BrokerClient::subscribe(const std::string& filter) {
  {
    std::lock_guard lk(mu_);
    subscriptions_.insert(filter);
  }
  if (connected_) send_envelope(MsgType::Subscribe, filter, json::object());
}

void BrokerClient::unsubscribe(const std::string& filter) {
  {
    std::lock_guard lk(mu_);
    subscriptions_.erase(filter);
  }
  if (connected_) send_envelope(MsgType::Unsubscribe, filter, json::object());
}

bool BrokerClient::publish(const std::string& topic, json payload) {
  return send_envelope(MsgType::Publish, topic, std::move(payload));
}

bool BrokerClient::send(MsgType type, json payload) {
  return send_envelope(type, std::nullopt, std::move(payload));
}

}  // namespace aicf

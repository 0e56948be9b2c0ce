#include <algorithm>

#include <spdlog/spdlog.h>

#include "aicf/translate.hpp"

namespace aicf {

ForeignLink::ForeignLink(std::shared_ptr<Translator> translator, std::string endpoint,
                         Network& net, Executor& executor, int max_dial_attempts)
    : translator_(std::move(translator)),
      endpoint_(std::move(endpoint)),
      net_(net),
      executor_(executor),
      max_dial_attempts_(max_dial_attempts) {}

void ForeignLink::start() {
  stopped_ = false;
  dial_once();
}

void ForeignLink::stop() {
  stopped_ = true;
  std::shared_ptr<Stream> stream;
  {
    std::lock_guard lk(mu_);
    stream = std::move(stream_);
  }
  connected_ = false;
  if (stream) stream->close();
}

bool ForeignLink::unreachable() const {
  return !connected_ && dial_attempts_ >= max_dial_attempts_;
}

void ForeignLink::dial_once() {
  if (stopped_) return;
  ++dial_attempts_;
  auto stream = net_.dial(endpoint_);
  if (!stream) {
    schedule_redial();
    return;
  }
  auto self = shared_from_this();
  {
    std::lock_guard lk(mu_);
    stream_ = stream;
  }
  stream->start([](std::string_view) { /* outbound only */ },
                [self] {
                  self->connected_ = false;
                  {
                    std::lock_guard lk(self->mu_);
                    self->stream_.reset();
                  }
                  self->schedule_redial();
                });
  connected_ = true;
  dial_attempts_ = 0;
  backoff_us_ = 0;
}

void ForeignLink::schedule_redial() {
  if (stopped_ || dial_attempts_ >= max_dial_attempts_) return;
  backoff_us_ = backoff_us_ == 0 ? 200'000 : std::min<std::uint64_t>(backoff_us_ * 2, 5'000'000);
  auto self = shared_from_this();
  executor_.schedule(backoff_us_, [self] { self->dial_once(); });
}

ForeignLink::SendStatus ForeignLink::send(const Envelope& env) {
  if (env.type != MsgType::InterAi) return SendStatus::UnsupportedType;
  auto frame = translator_->translate_out(env);
  if (!frame) {
    ++translation_failures_;
    return SendStatus::TranslationFailed;
  }
  std::lock_guard lk(mu_);
  if (!stream_ || !stream_->send(*frame)) return SendStatus::Unreachable;
  return SendStatus::Ok;
}

class ForeignGateway::Conn : public std::enable_shared_from_this<ForeignGateway::Conn> {
 public:
  Conn(ForeignGateway& gateway, std::shared_ptr<Stream> stream)
      : gateway_(gateway), stream_(std::move(stream)) {}

  void begin() {
    auto self = shared_from_this();
    stream_->start(
        [self](std::string_view bytes) {
          self->buf_.append(bytes);
          std::size_t start = 0;
          while (true) {
            std::size_t nl = self->buf_.find('\n', start);
            if (nl == std::string::npos) break;
            self->gateway_.handle_line(std::string_view(self->buf_).substr(start, nl - start + 1));
            start = nl + 1;
          }
          self->buf_.erase(0, start);
        },
        [self] {});
  }

 private:
  ForeignGateway& gateway_;
  std::shared_ptr<Stream> stream_;
  std::string buf_;
};

ForeignGateway::ForeignGateway(std::shared_ptr<Translator> translator, std::string listen_endpoint,
                               Network& net, std::shared_ptr<BrokerClient> interai_client,
                               std::string default_route_to)
    : translator_(std::move(translator)),
      endpoint_(std::move(listen_endpoint)),
      net_(net),
      interai_client_(std::move(interai_client)),
      default_route_to_(std::move(default_route_to)) {}

ForeignGateway::~ForeignGateway() { stop(); }

void ForeignGateway::start() {
  listener_ = net_.listen(endpoint_, [this](std::shared_ptr<Stream> stream) {
    std::make_shared<Conn>(*this, std::move(stream))->begin();
  });
  spdlog::info("gateway[{}] listening on {}", translator_->kind(), endpoint_);
}

void ForeignGateway::stop() {
  if (listener_) {
    listener_->close();
    listener_.reset();
  }
}

void ForeignGateway::handle_line(std::string_view line) {
  auto env = translator_->translate_in(line);
  if (!env) {
    std::lock_guard lk(mu_);
    ++stats_.failed;
    spdlog::warn("gateway[{}]: dropping untranslatable frame", translator_->kind());
    return;
  }
  // Relay on the local Inter-AI broker. The foreign sender rides in "from";
  // routing falls back to the configured local controller when the foreign
  // payload does not carry a "to".
  std::string to = default_route_to_;
  json data = env->payload;
  if (env->payload.contains("to") && env->payload["to"].is_string()) {
    to = env->payload["to"].get<std::string>();
  }
  if (env->payload.contains("data")) data = env->payload["data"];
  interai_client_->send(MsgType::InterAi,
                        json{{"to", to}, {"from", env->sender}, {"data", std::move(data)}});
  std::lock_guard lk(mu_);
  ++stats_.translated_in;
}

GatewayStats ForeignGateway::stats() const {
  std::lock_guard lk(mu_);
  return stats_;
}

}  // namespace aicf

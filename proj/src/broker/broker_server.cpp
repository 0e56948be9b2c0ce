#include "aicf/broker_server.hpp"

#include <utility>
#include <vector>

#include <spdlog/spdlog.h>

#include "aicf/codec.hpp"
#include "aicf/frame_reader.hpp"

namespace aicf {

class BrokerServer::Session : public std::enable_shared_from_this<BrokerServer::Session> {
 public:
  Session(BrokerServer& server, std::shared_ptr<Stream> stream)
      : server_(server), stream_(std::move(stream)) {}

  void begin() {
    auto self = shared_from_this();
    stream_->start([self](std::string_view bytes) { self->on_bytes(bytes); },
                   [self] { self->on_close(); });
  }

 private:
  void on_bytes(std::string_view bytes) {
    std::vector<std::pair<Envelope, std::shared_ptr<const std::string>>> frames;
    bool kill = false;
    {
      std::lock_guard lk(mu_);
      reader_.feed(bytes, [&](const DecodeResult& r, const std::shared_ptr<const std::string>& raw) {
        if (r.status != CodecStatus::Ok) {
          spdlog::warn("broker {}: closing {} on bad frame: {}", server_.core_.id(),
                       client_id_.empty() ? "<anon>" : client_id_, r.detail);
          kill = true;
          return;
        }
        frames.emplace_back(r.envelope, raw);
      });
    }
    for (auto& [env, raw] : frames) {
      if (kill) break;
      handle(env, raw, kill);
    }
    if (kill) stream_->close();
  }

  void handle(const Envelope& env, const std::shared_ptr<const std::string>& raw, bool& kill) {
    if (client_id_.empty()) {
      client_id_ = env.sender;
      std::shared_ptr<DeliverySink> sink;
      if (server_.options_.threaded_delivery) {
        sink = std::make_shared<ThreadedSink>(stream_, server_.options_.queue_capacity);
      } else {
        sink = std::make_shared<DirectSink>(stream_);
      }
      sink_ = sink;
      server_.core_.attach(client_id_, std::move(sink));
      attached_ = true;
    } else if (env.sender != client_id_) {
      spdlog::warn("broker {}: sender changed mid-connection ({} -> {}), closing",
                   server_.core_.id(), client_id_, env.sender);
      kill = true;
      return;
    }
    if (have_seq_ && env.seq <= last_seq_) {
      spdlog::warn("broker {}: non-monotone seq from {} ({} after {})", server_.core_.id(),
                   client_id_, env.seq, last_seq_);
      return;  // drop; per-sender seq must strictly increase
    }
    last_seq_ = env.seq;
    have_seq_ = true;
    server_.core_.ingress(client_id_, env, raw);
  }

  void on_close() {
    if (attached_) {
      // Only detach if this session still owns the client slot (it may have
      // been replaced by a reconnect).
      server_.core_.detach_if(client_id_, sink_.lock());
    }
  }

  BrokerServer& server_;
  std::shared_ptr<Stream> stream_;
  std::mutex mu_;
  FrameReader reader_;
  std::string client_id_;
  std::weak_ptr<DeliverySink> sink_;
  bool attached_ = false;
  bool have_seq_ = false;
  std::uint64_t last_seq_ = 0;
};

BrokerServer::BrokerServer(BrokerCore& core, Network& net, Executor& executor,
                           std::string endpoint, BrokerServerOptions options)
    : core_(core), net_(net), executor_(executor), endpoint_(std::move(endpoint)),
      options_(options) {
  core_.set_clock([this] { return executor_.now_us(); });
}

BrokerServer::~BrokerServer() { stop(); }

void BrokerServer::start() {
  listener_ = net_.listen(endpoint_, [this](std::shared_ptr<Stream> stream) {
    std::make_shared<Session>(*this, std::move(stream))->begin();
  });
  spdlog::info("broker {} listening on {}", core_.id(), endpoint_);
}

void BrokerServer::stop() {
  if (listener_) {
    listener_->close();
    listener_.reset();
  }
}

}  // namespace aicf

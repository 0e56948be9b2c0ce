#include <deque>
#include <utility>

#include "aicf/transport.hpp"

namespace aicf {

namespace {

/// One endpoint of an in-memory pipe. send() schedules delivery to the peer
/// on the executor, so all traffic flows through the event queue.
class InMemStream : public Stream, public std::enable_shared_from_this<InMemStream> {
 public:
  explicit InMemStream(Executor& executor) : executor_(executor) {}

  void bind_peer(std::shared_ptr<InMemStream> peer) { peer_ = std::move(peer); }

  bool send(const std::string& bytes) override {
    if (closed_) return false;
    auto peer = peer_.lock();
    if (!peer) return false;
    executor_.post([peer, bytes] { peer->deliver(bytes); });
    return true;
  }

  void start(BytesFn on_bytes, CloseFn on_close) override {
    on_bytes_ = std::move(on_bytes);
    on_close_ = std::move(on_close);
    started_ = true;
    while (!pending_.empty()) {
      std::string bytes = std::move(pending_.front());
      pending_.pop_front();
      if (on_bytes_) on_bytes_(bytes);
    }
    if (pending_close_ && on_close_) on_close_();
  }

  void close() override {
    if (closed_) return;
    closed_ = true;
    if (auto peer = peer_.lock()) {
      executor_.post([peer] { peer->peer_closed(); });
    }
  }

 private:
  void deliver(const std::string& bytes) {
    if (closed_) return;
    if (!started_) {
      pending_.push_back(bytes);
      return;
    }
    if (on_bytes_) on_bytes_(bytes);
  }

  void peer_closed() {
    if (closed_) return;
    closed_ = true;
    if (!started_) {
      pending_close_ = true;
      return;
    }
    if (on_close_) on_close_();
  }

  Executor& executor_;
  std::weak_ptr<InMemStream> peer_;
  BytesFn on_bytes_;
  CloseFn on_close_;
  std::deque<std::string> pending_;
  bool started_ = false;
  bool closed_ = false;
  bool pending_close_ = false;
};

}  // namespace

class InMemListener : public Listener {
 public:
  InMemListener(InMemNetwork& net, std::string endpoint) : net_(&net), endpoint_(std::move(endpoint)) {}
  ~InMemListener() override { close(); }

  void close() override {
    if (!net_) return;
    std::lock_guard lk(net_->mu_);
    net_->bound_.erase(endpoint_);
    net_ = nullptr;
  }

 private:
  InMemNetwork* net_;
  std::string endpoint_;
};

std::shared_ptr<Stream> InMemNetwork::dial(const std::string& endpoint) {
  AcceptFn accept;
  {
    std::lock_guard lk(mu_);
    auto it = bound_.find(endpoint);
    if (it == bound_.end()) return nullptr;
    accept = it->second;
  }
  auto client_side = std::make_shared<InMemStream>(executor_);
  auto server_side = std::make_shared<InMemStream>(executor_);
  client_side->bind_peer(server_side);
  server_side->bind_peer(client_side);
  executor_.post([accept, server_side] { accept(server_side); });
  return client_side;
}

std::unique_ptr<Listener> InMemNetwork::listen(const std::string& endpoint, AcceptFn on_accept) {
  std::lock_guard lk(mu_);
  auto [it, inserted] = bound_.emplace(endpoint, std::move(on_accept));
  if (!inserted) throw BindError("endpoint already bound: " + endpoint);
  return std::make_unique<InMemListener>(*this, endpoint);
}

}  // namespace aicf

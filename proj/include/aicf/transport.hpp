#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>

#include "aicf/executor.hpp"

namespace aicf {

class BindError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bidirectional byte stream. Implementations deliver received bytes through
/// the handler installed by start(); bytes arriving earlier are buffered.
class Stream {
 public:
  using BytesFn = std::function<void(std::string_view)>;
  using CloseFn = std::function<void()>;

  virtual ~Stream() = default;
  virtual bool send(const std::string& bytes) = 0;
  virtual void start(BytesFn on_bytes, CloseFn on_close) = 0;
  virtual void close() = 0;
};

class Listener {
 public:
  virtual ~Listener() = default;
  virtual void close() = 0;
};

/// Transport fabric: dial out or listen on named endpoints. The TCP
/// implementation uses "host:port" endpoints; the in-memory one uses
/// arbitrary names and schedules deliveries on an Executor so simulated
/// runs stay deterministic.
class Network {
 public:
  using AcceptFn = std::function<void(std::shared_ptr<Stream>)>;

  virtual ~Network() = default;
  /// Returns nullptr when the endpoint refuses or does not exist.
  virtual std::shared_ptr<Stream> dial(const std::string& endpoint) = 0;
  /// Throws BindError when the endpoint is taken or invalid.
  virtual std::unique_ptr<Listener> listen(const std::string& endpoint, AcceptFn on_accept) = 0;
};

class InMemNetwork : public Network {
 public:
  explicit InMemNetwork(Executor& executor) : executor_(executor) {}

  std::shared_ptr<Stream> dial(const std::string& endpoint) override;
  std::unique_ptr<Listener> listen(const std::string& endpoint, AcceptFn on_accept) override;

 private:
  friend class InMemListener;
  Executor& executor_;
  std::mutex mu_;
  std::map<std::string, AcceptFn> bound_;
};

class TcpNetwork : public Network {
 public:
  std::shared_ptr<Stream> dial(const std::string& endpoint) override;
  std::unique_ptr<Listener> listen(const std::string& endpoint, AcceptFn on_accept) override;
};

/// Splits "host:port". Throws std::invalid_argument on bad input.
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint);

}  // namespace aicf

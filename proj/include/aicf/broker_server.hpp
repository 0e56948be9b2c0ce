#pragma once

#include <memory>
#include <string>

#include "aicf/broker.hpp"
#include "aicf/executor.hpp"
#include "aicf/transport.hpp"

namespace aicf {

struct BrokerServerOptions {
  std::size_t queue_capacity = 1024;
  /// Threaded per-client writer queues (real sockets). Disable for the
  /// in-memory transport so simulated runs stay single-threaded.
  bool threaded_delivery = true;
};

/// Accepts stream connections on an endpoint and feeds them into a
/// BrokerCore. A connection is identified by the sender of its first
/// envelope; a later connection with the same sender replaces it.
class BrokerServer {
 public:
  BrokerServer(BrokerCore& core, Network& net, Executor& executor, std::string endpoint,
               BrokerServerOptions options = {});
  ~BrokerServer();

  /// Throws BindError if the endpoint is taken.
  void start();
  void stop();

 private:
  class Session;

  BrokerCore& core_;
  Network& net_;
  Executor& executor_;
  std::string endpoint_;
  BrokerServerOptions options_;
  std::unique_ptr<Listener> listener_;
};

}  // namespace aicf

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <thread>
#include <utility>

#include "aicf/transport.hpp"

namespace aicf {

namespace {

class TcpStream : public Stream, public std::enable_shared_from_this<TcpStream> {
 public:
  explicit TcpStream(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }

  ~TcpStream() override {
    close();
    if (reader_.joinable()) {
      // The final reference can be dropped by the reader itself.
      if (reader_.get_id() == std::this_thread::get_id()) {
        reader_.detach();
      } else {
        reader_.join();
      }
    }
  }

  bool send(const std::string& bytes) override {
    std::lock_guard lk(send_mu_);
    if (closed_.load()) return false;
    std::size_t off = 0;
    while (off < bytes.size()) {
      ssize_t n = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        return false;
      }
      off += static_cast<std::size_t>(n);
    }
    return true;
  }

  void start(BytesFn on_bytes, CloseFn on_close) override {
    on_bytes_ = std::move(on_bytes);
    on_close_ = std::move(on_close);
    auto self = shared_from_this();
    reader_ = std::thread([self] { self->read_loop(); });
  }

  void close() override {
    bool expected = false;
    if (closed_.compare_exchange_strong(expected, true)) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
    }
  }

 private:
  void read_loop() {
    char buf[16384];
    while (true) {
      ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
      if (n > 0) {
        if (on_bytes_) on_bytes_(std::string_view(buf, static_cast<std::size_t>(n)));
        continue;
      }
      if (n < 0 && errno == EINTR) continue;
      break;
    }
    if (!closed_.load() && on_close_) on_close_();
  }

  int fd_;
  std::atomic<bool> closed_{false};
  std::mutex send_mu_;
  BytesFn on_bytes_;
  CloseFn on_close_;
  std::thread reader_;
};

class TcpListener : public Listener {
 public:
  TcpListener(int fd, Network::AcceptFn on_accept) : fd_(fd), on_accept_(std::move(on_accept)) {
    acceptor_ = std::thread([this] { accept_loop(); });
  }

  ~TcpListener() override {
    close();
    if (acceptor_.joinable()) acceptor_.join();
  }

  void close() override {
    bool expected = false;
    if (closed_.compare_exchange_strong(expected, true)) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
    }
  }

 private:
  void accept_loop() {
    while (!closed_.load()) {
      int conn = ::accept(fd_, nullptr, nullptr);
      if (conn < 0) {
        if (errno == EINTR) continue;
        break;
      }
      on_accept_(std::make_shared<TcpStream>(conn));
    }
  }

  int fd_;
  std::atomic<bool> closed_{false};
  Network::AcceptFn on_accept_;
  std::thread acceptor_;
};

}  // namespace

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint) {
  auto colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == endpoint.size()) {
    throw std::invalid_argument("endpoint must be host:port, got '" + endpoint + "'");
  }
  const std::string host = endpoint.substr(0, colon);
  const std::string port_str = endpoint.substr(colon + 1);
  char* end = nullptr;
  long port = std::strtol(port_str.c_str(), &end, 10);
  if (*end != '\0' || port <= 0 || port > 65535) {
    throw std::invalid_argument("bad port in endpoint '" + endpoint + "'");
  }
  return {host, static_cast<std::uint16_t>(port)};
}

std::shared_ptr<Stream> TcpNetwork::dial(const std::string& endpoint) {
  auto [host, port] = parse_endpoint(endpoint);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0) return nullptr;
  std::shared_ptr<Stream> stream;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      stream = std::make_shared<TcpStream>(fd);
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  return stream;
}

std::unique_ptr<Listener> TcpNetwork::listen(const std::string& endpoint, AcceptFn on_accept) {
  auto [host, port] = parse_endpoint(endpoint);
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw BindError("socket: " + std::string(std::strerror(errno)));
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host == "0.0.0.0" || host.empty()) {
    addr.sin_addr.s_addr = INADDR_ANY;
  } else if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    if (host == "localhost") {
      ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    } else {
      ::close(fd);
      throw BindError("cannot resolve bind host: " + host);
    }
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    std::string err = std::strerror(errno);
    ::close(fd);
    throw BindError("bind " + endpoint + ": " + err);
  }
  if (::listen(fd, 64) != 0) {
    std::string err = std::strerror(errno);
    ::close(fd);
    throw BindError("listen " + endpoint + ": " + err);
  }
  return std::make_unique<TcpListener>(fd, std::move(on_accept));
}

}  // namespace aicf

#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmw/comms/message.hpp"
#include "mmw/core/error.hpp"

// Duplex byte-stream transports. Two realizations exist behind one interface
// so a topology can run single-process (paired queues) or across processes
// and machines (TCP).

namespace mmw {

class ByteStream {
public:
  virtual ~ByteStream() = default;
  virtual void send(const std::vector<std::uint8_t>& bytes) = 0;
  // Reads exactly n bytes. Returns false on orderly close before any byte;
  // throws transport-failure on close mid-read or I/O error.
  virtual bool recv_exact(std::uint8_t* buf, std::size_t n) = 0;
  virtual void close() = 0;
};

inline void send_frame(ByteStream& stream, const Message& msg) {
  stream.send(encode_message(msg));
}

// Receives one framed Message; nullopt on orderly peer close.
inline std::optional<Message> recv_frame(ByteStream& stream) {
  std::uint8_t prefix[4];
  if (!stream.recv_exact(prefix, 4)) return std::nullopt;
  std::uint32_t n = (std::uint32_t(prefix[0]) << 24) | (std::uint32_t(prefix[1]) << 16) |
                    (std::uint32_t(prefix[2]) << 8) | std::uint32_t(prefix[3]);
  if (n > kMaxFrameBytes) throw Error("payload-too-large", "declared frame too large");
  std::vector<std::uint8_t> frame(4 + std::size_t{n});
  std::memcpy(frame.data(), prefix, 4);
  if (n > 0 && !stream.recv_exact(frame.data() + 4, n))
    throw Error("truncated-frame", "peer closed mid-frame");
  return decode_message(frame);
}

// ---------------------------------------------------------------------------
// In-process transport: a pair of byte queues.

namespace detail {

struct BytePipe {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::uint8_t> data;
  bool closed = false;

  void write(const std::vector<std::uint8_t>& bytes) {
    std::lock_guard lock(mu);
    if (closed) throw Error("transport-failure", "pipe closed");
    data.insert(data.end(), bytes.begin(), bytes.end());
    cv.notify_all();
  }

  // Returns bytes read; 0 means closed and drained.
  std::size_t read(std::uint8_t* buf, std::size_t n) {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return !data.empty() || closed; });
    std::size_t got = 0;
    while (got < n && !data.empty()) {
      buf[got++] = data.front();
      data.pop_front();
    }
    return got;
  }

  void close() {
    std::lock_guard lock(mu);
    closed = true;
    cv.notify_all();
  }
};

}  // namespace detail

class InProcStream : public ByteStream {
public:
  InProcStream(std::shared_ptr<detail::BytePipe> in, std::shared_ptr<detail::BytePipe> out)
      : in_(std::move(in)), out_(std::move(out)) {}

  ~InProcStream() override { close(); }

  void send(const std::vector<std::uint8_t>& bytes) override { out_->write(bytes); }

  bool recv_exact(std::uint8_t* buf, std::size_t n) override {
    std::size_t got = 0;
    while (got < n) {
      std::size_t r = in_->read(buf + got, n - got);
      if (r == 0) {
        if (got == 0) return false;
        throw Error("transport-failure", "stream closed mid-read");
      }
      got += r;
    }
    return true;
  }

  void close() override {
    in_->close();
    out_->close();
  }

private:
  std::shared_ptr<detail::BytePipe> in_;
  std::shared_ptr<detail::BytePipe> out_;
};

// Accept side of the in-process transport. connect() hands the server half
// to the accept queue and returns the client half.
class InProcListener {
public:
  std::unique_ptr<ByteStream> connect() {
    auto a = std::make_shared<detail::BytePipe>();
    auto b = std::make_shared<detail::BytePipe>();
    auto server_half = std::make_unique<InProcStream>(a, b);
    {
      std::lock_guard lock(mu_);
      if (closed_) throw Error("transport-failure", "listener closed");
      pending_.push_back(std::move(server_half));
      cv_.notify_all();
    }
    return std::make_unique<InProcStream>(b, a);
  }

  // Blocks until a connection arrives or the listener closes (nullptr).
  std::unique_ptr<ByteStream> accept() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !pending_.empty() || closed_; });
    if (pending_.empty()) return nullptr;
    auto s = std::move(pending_.front());
    pending_.pop_front();
    return s;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    cv_.notify_all();
  }

private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::unique_ptr<ByteStream>> pending_;
  bool closed_ = false;
};

// ---------------------------------------------------------------------------
// TCP transport.

class TcpStream : public ByteStream {
public:
  explicit TcpStream(int fd) : fd_(fd) {}
  ~TcpStream() override { close(); }

  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;

  void send(const std::vector<std::uint8_t>& bytes) override {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
      ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) throw Error("transport-failure", "send failed: " + std::string(strerror(errno)));
      sent += static_cast<std::size_t>(n);
    }
  }

  bool recv_exact(std::uint8_t* buf, std::size_t n) override {
    std::size_t got = 0;
    while (got < n) {
      ssize_t r = ::recv(fd_, buf + got, n - got, 0);
      if (r == 0) {
        if (got == 0) return false;
        throw Error("transport-failure", "peer closed mid-read");
      }
      if (r < 0) {
        if (errno == EINTR) continue;
        throw Error("transport-failure", "recv failed: " + std::string(strerror(errno)));
      }
      got += static_cast<std::size_t>(r);
    }
    return true;
  }

  void close() override {
    int fd = fd_.exchange(-1);
    if (fd >= 0) {
      ::shutdown(fd, SHUT_RDWR);
      ::close(fd);
    }
  }

private:
  std::atomic<int> fd_;
};

class TcpListener {
public:
  // bind_addr may be overridden by MMW_BIND_ADDR.
  explicit TcpListener(int port, std::string bind_addr = "0.0.0.0") {
    if (const char* env = std::getenv("MMW_BIND_ADDR")) bind_addr = env;
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw Error("transport-failure", "socket: " + std::string(strerror(errno)));
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, bind_addr.c_str(), &addr.sin_addr) != 1)
      throw Error("transport-failure", "bad bind address '" + bind_addr + "'");
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0)
      throw Error("transport-failure",
                  "bind to port " + std::to_string(port) + ": " + strerror(errno));
    if (::listen(fd_, 16) < 0)
      throw Error("transport-failure", "listen: " + std::string(strerror(errno)));
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
  }

  ~TcpListener() { close(); }

  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  int port() const { return port_; }

  std::unique_ptr<ByteStream> accept() {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) return nullptr;  // closed
    return std::make_unique<TcpStream>(fd);
  }

  void close() {
    int fd = fd_;
    fd_ = -1;
    if (fd >= 0) {
      ::shutdown(fd, SHUT_RDWR);
      ::close(fd);
    }
  }

private:
  int fd_ = -1;
  int port_ = 0;
};

inline std::unique_ptr<ByteStream> tcp_connect(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
    throw Error("transport-failure", "cannot resolve '" + host + "'");
  int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    throw Error("transport-failure", "socket: " + std::string(strerror(errno)));
  }
  if (::connect(fd, res->ai_addr, res->ai_addrlen) < 0) {
    ::freeaddrinfo(res);
    ::close(fd);
    throw Error("transport-failure",
                "connect to " + host + ":" + std::to_string(port) + ": " + strerror(errno));
  }
  ::freeaddrinfo(res);
  return std::make_unique<TcpStream>(fd);
}

// ---------------------------------------------------------------------------
// A peer endpoint: either an in-process listener or a host:port pair.

struct Endpoint {
  std::shared_ptr<InProcListener> inproc;
  std::string host;
  int port = 0;

  static Endpoint in_process(std::shared_ptr<InProcListener> l) {
    Endpoint e;
    e.inproc = std::move(l);
    return e;
  }
  static Endpoint tcp(std::string host, int port) {
    Endpoint e;
    e.host = std::move(host);
    e.port = port;
    return e;
  }

  std::unique_ptr<ByteStream> connect() const {
    if (inproc) return inproc->connect();
    return tcp_connect(host, port);
  }
};

}  // namespace mmw

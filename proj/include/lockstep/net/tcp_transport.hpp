#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>

#include <poll.h>
#include <sys/socket.h>

#include "lockstep/net/socket.hpp"
#include "lockstep/proto/codec.hpp"

namespace lockstep::net {

/// Blocking client connection speaking the length-prefixed frame protocol.
/// send() and receive() may be called from different threads.
class TcpTransport {
 public:
  static TcpTransport connect(const HostPort& hp, std::size_t frame_cap = proto::kMaxFrameBytes) {
    return TcpTransport(connect_tcp(hp), frame_cap);
  }

  TcpTransport(Fd fd, std::size_t frame_cap) : fd_(std::move(fd)), reader_(frame_cap), cap_(frame_cap) {}

  void send(const proto::Frame& f) {
    const proto::Bytes bytes = proto::encode_frame(f, cap_);
    std::lock_guard lock(send_mu_);
    std::size_t off = 0;
    while (off < bytes.size()) {
      const ssize_t n = ::send(fd_.get(), bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw system_error("send");
      }
      off += static_cast<std::size_t>(n);
    }
  }

  /// Blocks until a whole frame arrives. Throws TransportError on EOF.
  proto::Frame receive() {
    for (;;) {
      if (auto f = reader_.next()) return std::move(*f);
      fill(-1);
    }
  }

  /// Waits at most `timeout`; nullopt if no complete frame arrived in time.
  std::optional<proto::Frame> receive_for(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (auto f = reader_.next()) return f;
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return std::nullopt;
      fill(static_cast<int>(left.count()));
    }
  }

  void shutdown() { ::shutdown(fd_.get(), SHUT_RDWR); }

 private:
  void fill(int timeout_ms) {
    pollfd pfd{fd_.get(), POLLIN, 0};
    const int rc = ::poll(&pfd, 1, timeout_ms);
    if (rc < 0) {
      if (errno == EINTR) return;
      throw system_error("poll");
    }
    if (rc == 0) return;
    std::array<std::uint8_t, 65536> buf;
    const ssize_t n = ::recv(fd_.get(), buf.data(), buf.size(), 0);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) return;
      throw system_error("recv");
    }
    if (n == 0) throw TransportError("connection closed by peer");
    reader_.feed(std::span<const std::uint8_t>(buf.data(), static_cast<std::size_t>(n)));
  }

  Fd fd_;
  proto::FrameReader reader_;
  std::size_t cap_;
  std::mutex send_mu_;
};

}  // namespace lockstep::net

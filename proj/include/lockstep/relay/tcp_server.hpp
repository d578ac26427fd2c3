#pragma once

// TCP front end of the relay: a single-threaded poll() loop feeding a
// RoomTable. Because every frame is handled on one thread, broadcast order
// within a room is exactly the order frames were read.

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include "lockstep/net/socket.hpp"
#include "lockstep/proto/codec.hpp"
#include "lockstep/relay/room_table.hpp"

namespace lockstep::relay {

struct ServerOptions {
  net::HostPort listen{"127.0.0.1", 0};
  std::size_t frame_cap = proto::kMaxFrameBytes;
  RoomTableOptions rooms;
};

class RelayServer {
 public:
  explicit RelayServer(ServerOptions options, RoomTable::SeedSource seeds = os_entropy_seed)
      : options_(std::move(options)),
        table_(options_.rooms, std::move(seeds)),
        listener_(net::listen_tcp(options_.listen)) {
    net::set_nonblocking(listener_.get());
    int pipe_fds[2];
    if (::pipe(pipe_fds) != 0) throw net::system_error("pipe");
    wake_read_.reset(pipe_fds[0]);
    wake_write_.reset(pipe_fds[1]);
    net::set_nonblocking(wake_read_.get());
  }

  RelayServer(const RelayServer&) = delete;
  RelayServer& operator=(const RelayServer&) = delete;

  std::uint16_t port() const { return net::local_port(listener_.get()); }

  /// Serves until stop() is called from any thread.
  void run() {
    spdlog::info("relay listening on port {}", port());
    while (!stopping_.load()) {
      std::vector<pollfd> fds;
      fds.push_back({listener_.get(), POLLIN, 0});
      fds.push_back({wake_read_.get(), POLLIN, 0});
      for (const auto& [id, c] : conns_) {
        short events = c.closing ? 0 : POLLIN;
        if (!c.outbox.empty()) events |= POLLOUT;
        fds.push_back({c.fd.get(), events, 0});
      }
      if (::poll(fds.data(), fds.size(), -1) < 0) {
        if (errno == EINTR) continue;
        throw net::system_error("poll");
      }
      if (fds[0].revents & POLLIN) accept_all();

      std::vector<ConnectionId> dead;
      std::size_t i = 2;
      for (auto& [id, c] : conns_) {
        if (i >= fds.size() || fds[i].fd != c.fd.get()) break;  // accepted during this round
        const short re = fds[i++].revents;
        if (re & (POLLIN | POLLHUP | POLLERR)) {
          if (!read_from(id, c)) dead.push_back(id);
        }
      }
      for (auto& [id, c] : conns_) {
        if (!c.outbox.empty() && !flush(c)) dead.push_back(id);
        else if (c.closing && c.outbox.empty()) dead.push_back(id);
      }
      for (ConnectionId id : dead) drop(id);
    }
  }

  void stop() {
    stopping_.store(true);
    const char b = 1;
    [[maybe_unused]] auto n = ::write(wake_write_.get(), &b, 1);
  }

 private:
  struct Conn {
    net::Fd fd;
    proto::FrameReader reader;
    proto::Bytes outbox;
    std::size_t sent = 0;
    bool closing = false;
  };

  void accept_all() {
    for (;;) {
      const int fd = ::accept(listener_.get(), nullptr, nullptr);
      if (fd < 0) return;
      net::set_nonblocking(fd);
      net::set_nodelay(fd);
      const ConnectionId id = next_id_++;
      conns_.emplace(id, Conn{net::Fd(fd), proto::FrameReader(options_.frame_cap), {}, 0, false});
      spdlog::debug("connection {} accepted", id);
    }
  }

  // False when the connection is gone.
  bool read_from(ConnectionId id, Conn& c) {
    std::array<std::uint8_t, 65536> buf;
    const ssize_t n = ::recv(c.fd.get(), buf.data(), buf.size(), 0);
    if (n < 0) return errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR;
    if (n == 0) return false;
    if (c.closing) return true;
    c.reader.feed(std::span<const std::uint8_t>(buf.data(), static_cast<std::size_t>(n)));
    try {
      while (auto frame = c.reader.next()) {
        spdlog::trace("connection {} -> {}", id, proto::frame_type(*frame));
        deliver(table_.handle_frame(id, *frame));
      }
    } catch (const proto::ProtocolError& e) {
      spdlog::warn("connection {} sent a bad frame: {}", id, e.what());
      enqueue(c, proto::ErrorFrame{proto::ErrorCode::ProtocolError, e.what()});
      c.closing = true;
    }
    return true;
  }

  void deliver(const std::vector<Outgoing>& out) {
    for (const Outgoing& o : out) {
      auto it = conns_.find(o.to);
      if (it != conns_.end()) enqueue(it->second, o.frame);
    }
  }

  void enqueue(Conn& c, const proto::Frame& f) {
    const proto::Bytes bytes = proto::encode_frame(f, options_.frame_cap);
    c.outbox.insert(c.outbox.end(), bytes.begin(), bytes.end());
  }

  bool flush(Conn& c) {
    while (c.sent < c.outbox.size()) {
      const ssize_t n = ::send(c.fd.get(), c.outbox.data() + c.sent, c.outbox.size() - c.sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK) break;
        if (errno == EINTR) continue;
        return false;
      }
      c.sent += static_cast<std::size_t>(n);
    }
    if (c.sent == c.outbox.size()) {
      c.outbox.clear();
      c.sent = 0;
    }
    return true;
  }

  void drop(ConnectionId id) {
    if (conns_.erase(id) == 0) return;
    spdlog::debug("connection {} closed", id);
    deliver(table_.on_disconnect(id));
  }

  ServerOptions options_;
  RoomTable table_;
  net::Fd listener_;
  net::Fd wake_read_;
  net::Fd wake_write_;
  std::map<ConnectionId, Conn> conns_;
  ConnectionId next_id_ = 1;
  std::atomic<bool> stopping_{false};
};

}  // namespace lockstep::relay

#pragma once

// Lobby and broadcast logic of the relay, independent of any socket code.
// Every call returns the frames to send; the caller owns the transport.
//
// The relay never looks at timestamps and never reorders: frames from one
// sender reach every other member in the order they were handled.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lockstep/det/det_rng.hpp"
#include "lockstep/error.hpp"
#include "lockstep/proto/frame.hpp"

namespace lockstep::relay {

using ConnectionId = std::uint64_t;

struct Outgoing {
  ConnectionId to = 0;
  proto::Frame frame;
};

inline constexpr std::size_t kCodeSpace = 26 * 26 * 26 * 26;

/// Uniform random four-letter code not in `occupied`. Throws once all
/// 26^4 codes are taken.
template <class Set>
std::string generate_code(const Set& occupied, det::DetRng& rng) {
  if (occupied.size() >= kCodeSpace) throw Error("generate_code: all room codes are in use");
  auto code_at = [](std::uint64_t index) {
    std::string code(4, 'A');
    for (int i = 3; i >= 0; --i) {
      code[static_cast<std::size_t>(i)] = static_cast<char>('A' + index % 26);
      index /= 26;
    }
    return code;
  };
  if (occupied.size() < kCodeSpace / 2) {
    for (;;) {
      std::string code = code_at(rng.below(kCodeSpace));
      if (!occupied.contains(code)) return code;
    }
  }
  // Dense table: pick the k-th free code directly instead of retrying.
  std::uint64_t k = rng.below(kCodeSpace - occupied.size());
  for (std::uint64_t i = 0; i < kCodeSpace; ++i) {
    std::string code = code_at(i);
    if (occupied.contains(code)) continue;
    if (k-- == 0) return code;
  }
  throw Error("generate_code: occupied set changed during generation");
}

inline std::uint64_t os_entropy_seed() {
  std::random_device rd;
  return (std::uint64_t{rd()} << 32) ^ rd();
}

struct RoomTableOptions {
  std::size_t max_rooms = 4096;
  std::uint32_t proto_version = proto::kProtocolVersion;
};

enum class RoomState { Lobby, Running };

class RoomTable {
 public:
  using SeedSource = std::function<std::uint64_t()>;

  explicit RoomTable(RoomTableOptions options = {}, SeedSource seeds = os_entropy_seed,
                     std::uint64_t code_seed = os_entropy_seed())
      : options_(options), seeds_(std::move(seeds)), code_rng_(code_seed) {}

  std::vector<Outgoing> handle_frame(ConnectionId conn, const proto::Frame& frame) {
    std::vector<Outgoing> out;
    Connection& c = connections_[conn];
    if (const auto* hello = std::get_if<proto::ClientHello>(&frame)) {
      if (c.hello) {
        reject(out, conn, "duplicate ClientHello");
      } else if (hello->proto_version != options_.proto_version) {
        reject(out, conn, "unsupported protocol version " + std::to_string(hello->proto_version));
      } else {
        c.hello = true;
        c.game_hash = hello->game_hash;
      }
      return out;
    }
    if (!c.hello) {
      reject(out, conn, "ClientHello required first");
      return out;
    }
    std::visit([&](const auto& f) { on(out, conn, c, f); }, frame);
    return out;
  }

  std::vector<Outgoing> on_disconnect(ConnectionId conn) {
    std::vector<Outgoing> out;
    auto it = connections_.find(conn);
    if (it == connections_.end()) return out;
    const std::optional<std::string> code = it->second.room;
    connections_.erase(it);
    if (!code) return out;
    auto room_it = rooms_.find(*code);
    if (room_it == rooms_.end()) return out;
    Room& room = room_it->second;
    std::erase_if(room.members, [conn](const Member& m) { return m.conn == conn; });
    if (room.state == RoomState::Running) {
      // A departed player's latest time would freeze everyone's commit horizon.
      close_room(out, room_it, proto::ErrorCode::ProtocolError, "player left");
      return out;
    }
    if (room.members.empty()) {
      rooms_.erase(room_it);
      return out;
    }
    broadcast_progress(out, room);
    return out;
  }

  std::size_t room_count() const { return rooms_.size(); }

  std::optional<RoomState> room_state(const std::string& code) const {
    auto it = rooms_.find(code);
    if (it == rooms_.end()) return std::nullopt;
    return it->second.state;
  }

 private:
  struct Member {
    ConnectionId conn = 0;
    std::string game_hash;
  };
  struct Room {
    std::string code;
    std::uint8_t required = 0;
    std::vector<Member> members;  // seat == index
    RoomState state = RoomState::Lobby;
  };
  struct Connection {
    bool hello = false;
    std::string game_hash;
    std::optional<std::string> room;
  };
  using RoomIter = std::map<std::string, Room>::iterator;

  static void send(std::vector<Outgoing>& out, ConnectionId to, proto::Frame f) {
    out.push_back({to, std::move(f)});
  }

  static void reject(std::vector<Outgoing>& out, ConnectionId to, std::string detail,
                     proto::ErrorCode code = proto::ErrorCode::ProtocolError) {
    send(out, to, proto::ErrorFrame{code, std::move(detail)});
  }

  void on(std::vector<Outgoing>& out, ConnectionId conn, Connection& c, const proto::CreateGame& f) {
    if (c.room) return reject(out, conn, "already in a room");
    if (rooms_.size() >= options_.max_rooms) return reject(out, conn, "too many rooms");
    std::string code = generate_code(rooms_, code_rng_);
    Room& room = rooms_[code];
    room.code = code;
    room.required = f.num_players;
    send(out, conn, proto::GameCreated{code});
    join(out, conn, c, rooms_.find(code));
  }

  void on(std::vector<Outgoing>& out, ConnectionId conn, Connection& c, const proto::JoinGame& f) {
    if (c.room) return reject(out, conn, "already in a room");
    auto it = rooms_.find(f.code);
    if (it == rooms_.end()) return reject(out, conn, "no room " + f.code, proto::ErrorCode::BadCode);
    if (it->second.state != RoomState::Lobby || it->second.members.size() >= it->second.required) {
      return reject(out, conn, "room " + f.code + " is full", proto::ErrorCode::GameFull);
    }
    join(out, conn, c, it);
  }

  void on(std::vector<Outgoing>& out, ConnectionId conn, Connection& c, const proto::Input& f) {
    Room* room = running_room(c);
    if (!room) return reject(out, conn, "Input outside a running game");
    const PlayerId sender = seat_of(*room, conn);
    for (const Member& m : room->members) {
      if (m.conn != conn) send(out, m.conn, proto::Relayed{f.t_bits, sender, f.event});
    }
  }

  void on(std::vector<Outgoing>& out, ConnectionId conn, Connection& c, const proto::Ping& f) {
    Room* room = running_room(c);
    if (!room) return reject(out, conn, "Ping outside a running game");
    const PlayerId sender = seat_of(*room, conn);
    for (const Member& m : room->members) {
      if (m.conn != conn) send(out, m.conn, proto::RelayedPing{f.t_bits, sender});
    }
  }

  // Server-to-client frames are never valid from a client.
  template <class F>
  void on(std::vector<Outgoing>& out, ConnectionId conn, Connection&, const F&) {
    reject(out, conn, "unexpected frame from client");
  }

  void join(std::vector<Outgoing>& out, ConnectionId conn, Connection& c, RoomIter it) {
    Room& room = it->second;
    room.members.push_back({conn, c.game_hash});
    c.room = room.code;
    broadcast_progress(out, room);
    if (room.members.size() < room.required) return;

    const std::string& first = room.members.front().game_hash;
    const bool hashes_match = std::all_of(room.members.begin(), room.members.end(),
                                          [&](const Member& m) { return m.game_hash == first; });
    if (!hashes_match) {
      close_room(out, it, proto::ErrorCode::HashMismatch, "clients run different game rules");
      return;
    }
    room.state = RoomState::Running;
    const std::uint64_t seed = seeds_();
    for (std::size_t i = 0; i < room.members.size(); ++i) {
      send(out, room.members[i].conn,
           proto::GameStarted{PlayerId{static_cast<std::uint32_t>(i)}, room.required, seed});
    }
  }

  static void broadcast_progress(std::vector<Outgoing>& out, const Room& room) {
    const auto joined = static_cast<std::uint8_t>(room.members.size());
    for (std::size_t i = 0; i < room.members.size(); ++i) {
      send(out, room.members[i].conn,
           proto::Joined{PlayerId{static_cast<std::uint32_t>(i)}, joined, room.required});
    }
  }

  void close_room(std::vector<Outgoing>& out, RoomIter it, proto::ErrorCode code, const std::string& detail) {
    for (const Member& m : it->second.members) {
      send(out, m.conn, proto::ErrorFrame{code, detail});
      if (auto c = connections_.find(m.conn); c != connections_.end()) c->second.room.reset();
    }
    rooms_.erase(it);
  }

  Room* running_room(const Connection& c) {
    if (!c.room) return nullptr;
    auto it = rooms_.find(*c.room);
    if (it == rooms_.end() || it->second.state != RoomState::Running) return nullptr;
    return &it->second;
  }

  static PlayerId seat_of(const Room& room, ConnectionId conn) {
    for (std::size_t i = 0; i < room.members.size(); ++i) {
      if (room.members[i].conn == conn) return PlayerId{static_cast<std::uint32_t>(i)};
    }
    throw Error("relay: connection is not a member of its room");
  }

  RoomTableOptions options_;
  SeedSource seeds_;
  det::DetRng code_rng_;
  std::map<std::string, Room> rooms_;
  std::unordered_map<ConnectionId, Connection> connections_;
};

}  // namespace lockstep::relay

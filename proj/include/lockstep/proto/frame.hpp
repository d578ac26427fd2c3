#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "lockstep/core/types.hpp"
#include "lockstep/error.hpp"

namespace lockstep::proto {

inline constexpr std::uint32_t kProtocolVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = 1u << 20;

inline std::uint64_t timestamp_bits(Timestamp t) { return std::bit_cast<std::uint64_t>(t); }
inline Timestamp timestamp_from_bits(std::uint64_t bits) { return std::bit_cast<Timestamp>(bits); }

enum class ErrorCode : std::uint8_t { BadCode, GameFull, HashMismatch, OutOfOrder, ProtocolError };

inline std::string_view error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::BadCode: return "BadCode";
    case ErrorCode::GameFull: return "GameFull";
    case ErrorCode::HashMismatch: return "HashMismatch";
    case ErrorCode::OutOfOrder: return "OutOfOrder";
    case ErrorCode::ProtocolError: return "ProtocolError";
  }
  return "?";
}

// Client -> server.
struct ClientHello {
  std::uint32_t proto_version = kProtocolVersion;
  std::string game_hash;  // 64 lowercase hex digits
  friend bool operator==(const ClientHello&, const ClientHello&) = default;
};
struct CreateGame {
  std::uint8_t num_players = 0;
  friend bool operator==(const CreateGame&, const CreateGame&) = default;
};
struct JoinGame {
  std::string code;
  friend bool operator==(const JoinGame&, const JoinGame&) = default;
};
struct Input {
  std::uint64_t t_bits = 0;
  InputEvent event;
  friend bool operator==(const Input&, const Input&) = default;
};
struct Ping {
  std::uint64_t t_bits = 0;
  friend bool operator==(const Ping&, const Ping&) = default;
};

// Server -> client.
struct GameCreated {
  std::string code;  // [A-Z]{4}
  friend bool operator==(const GameCreated&, const GameCreated&) = default;
};
/// Lobby progress. `player` is the recipient's own seat.
struct Joined {
  PlayerId player;
  std::uint8_t joined = 0;
  std::uint8_t total = 0;
  friend bool operator==(const Joined&, const Joined&) = default;
};
struct GameStarted {
  PlayerId player;
  std::uint8_t num_players = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const GameStarted&, const GameStarted&) = default;
};
struct Relayed {
  std::uint64_t t_bits = 0;
  PlayerId player;
  InputEvent event;
  friend bool operator==(const Relayed&, const Relayed&) = default;
};
struct RelayedPing {
  std::uint64_t t_bits = 0;
  PlayerId player;
  friend bool operator==(const RelayedPing&, const RelayedPing&) = default;
};
struct ErrorFrame {
  ErrorCode code = ErrorCode::ProtocolError;
  std::string detail;
  friend bool operator==(const ErrorFrame&, const ErrorFrame&) = default;
};

using Frame = std::variant<ClientHello, CreateGame, GameCreated, JoinGame, Joined, GameStarted,
                           Input, Ping, Relayed, RelayedPing, ErrorFrame>;

inline std::string_view frame_type(const Frame& f) {
  static constexpr std::string_view names[] = {
      "ClientHello", "CreateGame", "GameCreated", "JoinGame", "Joined",     "GameStarted",
      "Input",       "Ping",       "Relayed",     "RelayedPing", "Error"};
  static_assert(std::size(names) == std::variant_size_v<Frame>);
  return names[f.index()];
}

inline bool is_room_code(std::string_view code) {
  if (code.size() != 4) return false;
  for (char c : code) {
    if (c < 'A' || c > 'Z') return false;
  }
  return true;
}

inline bool is_game_hash(std::string_view h) {
  if (h.size() != 64) return false;
  for (char c : h) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

/// Any failure to encode or decode a frame.
class ProtocolError : public Error {
 public:
  enum class Kind { Truncated, BadLength, TooLarge, Malformed, Schema, UnknownType };

  ProtocolError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace lockstep::proto

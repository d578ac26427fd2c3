#pragma once

// Wire format: a 4-byte big-endian payload length, then a UTF-8 JSON object
// {"type": <tag>, ...fields} with keys in alphabetical order. Floating point
// values never appear in the JSON; they travel as the decimal rendering of
// their IEEE-754 bit pattern so every client sees identical bits.
//
// Decoding is strict: unknown keys, missing keys and out-of-range values are
// all rejected, so decode(encode(f)) == f and encode(decode(b)) == b for any
// b produced by this encoder.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lockstep/proto/frame.hpp"

namespace lockstep::proto {

using Bytes = std::vector<std::uint8_t>;
using Json = nlohmann::json;

namespace detail {

[[noreturn]] inline void schema_error(const std::string& what) {
  throw ProtocolError(ProtocolError::Kind::Schema, "frame schema violation: " + what);
}

inline void expect_keys(const Json& obj, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) schema_error("expected an object");
  if (obj.size() != keys.size()) schema_error("unexpected field count " + std::to_string(obj.size()));
  for (std::string_view k : keys) {
    if (!obj.contains(k)) schema_error("missing field '" + std::string(k) + "'");
  }
}

inline std::uint64_t get_u64(const Json& obj, std::string_view key,
                             std::uint64_t max = std::numeric_limits<std::uint64_t>::max()) {
  const Json& v = obj.at(key);
  if (!v.is_number_unsigned()) schema_error("'" + std::string(key) + "' must be an unsigned integer");
  const auto n = v.get<std::uint64_t>();
  if (n > max) schema_error("'" + std::string(key) + "' out of range");
  return n;
}

inline std::string get_string(const Json& obj, std::string_view key) {
  const Json& v = obj.at(key);
  if (!v.is_string()) schema_error("'" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

inline double get_coordinate(const Json& obj, std::string_view key) {
  const double d = timestamp_from_bits(get_u64(obj, key));
  if (!std::isfinite(d)) schema_error("'" + std::string(key) + "' is not finite");
  return d;
}

inline PlayerId get_player(const Json& obj, std::string_view key) {
  return PlayerId{static_cast<std::uint32_t>(get_u64(obj, key, std::numeric_limits<std::uint32_t>::max()))};
}

inline std::uint8_t get_u8(const Json& obj, std::string_view key) {
  return static_cast<std::uint8_t>(get_u64(obj, key, 255));
}

inline MouseButton parse_button(const std::string& s) {
  if (s == "Left") return MouseButton::Left;
  if (s == "Middle") return MouseButton::Middle;
  if (s == "Right") return MouseButton::Right;
  schema_error("unknown mouse button '" + s + "'");
}

inline ErrorCode parse_error_code(const std::string& s) {
  for (auto c : {ErrorCode::BadCode, ErrorCode::GameFull, ErrorCode::HashMismatch,
                 ErrorCode::OutOfOrder, ErrorCode::ProtocolError}) {
    if (error_code_name(c) == s) return c;
  }
  schema_error("unknown error code '" + s + "'");
}

inline Json point_fields(Json obj, const Point& p) {
  obj["x_bits"] = timestamp_bits(p.x);
  obj["y_bits"] = timestamp_bits(p.y);
  return obj;
}

inline std::string checked_code(std::string code) {
  if (!is_room_code(code)) schema_error("room code must be four letters A-Z");
  return code;
}

}  // namespace detail

inline Json event_to_json(const InputEvent& e) {
  struct {
    Json operator()(const KeyPress& k) const { return {{"kind", "KeyPress"}, {"text", k.key}}; }
    Json operator()(const KeyRelease& k) const { return {{"kind", "KeyRelease"}, {"text", k.key}}; }
    Json operator()(const MousePress& m) const {
      return detail::point_fields({{"button", button_name(m.button)}, {"kind", "MousePress"}}, m.at);
    }
    Json operator()(const MouseRelease& m) const {
      return detail::point_fields({{"button", button_name(m.button)}, {"kind", "MouseRelease"}}, m.at);
    }
    Json operator()(const MouseMovement& m) const {
      return detail::point_fields({{"kind", "MouseMovement"}}, m.at);
    }
  } visitor;
  return std::visit(visitor, e);
}

inline InputEvent event_from_json(const Json& j) {
  using namespace detail;
  if (!j.is_object() || !j.contains("kind")) schema_error("event needs a 'kind'");
  const std::string kind = get_string(j, "kind");
  auto point = [&] { return Point{get_coordinate(j, "x_bits"), get_coordinate(j, "y_bits")}; };
  auto text = [&] {
    std::string t = get_string(j, "text");
    if (t.empty()) schema_error("key text must be non-empty");
    return t;
  };
  if (kind == "KeyPress") {
    expect_keys(j, {"kind", "text"});
    return KeyPress{text()};
  }
  if (kind == "KeyRelease") {
    expect_keys(j, {"kind", "text"});
    return KeyRelease{text()};
  }
  if (kind == "MousePress") {
    expect_keys(j, {"button", "kind", "x_bits", "y_bits"});
    return MousePress{parse_button(get_string(j, "button")), point()};
  }
  if (kind == "MouseRelease") {
    expect_keys(j, {"button", "kind", "x_bits", "y_bits"});
    return MouseRelease{parse_button(get_string(j, "button")), point()};
  }
  if (kind == "MouseMovement") {
    expect_keys(j, {"kind", "x_bits", "y_bits"});
    return MouseMovement{point()};
  }
  schema_error("unknown event kind '" + kind + "'");
}

inline Json frame_to_json(const Frame& f) {
  struct {
    Json operator()(const ClientHello& h) const {
      return {{"game_hash", h.game_hash}, {"proto_version", h.proto_version}, {"type", "ClientHello"}};
    }
    Json operator()(const CreateGame& c) const {
      return {{"num_players", c.num_players}, {"type", "CreateGame"}};
    }
    Json operator()(const GameCreated& g) const { return {{"code", g.code}, {"type", "GameCreated"}}; }
    Json operator()(const JoinGame& g) const { return {{"code", g.code}, {"type", "JoinGame"}}; }
    Json operator()(const Joined& j) const {
      return {{"joined", j.joined}, {"player", j.player.value}, {"total", j.total}, {"type", "Joined"}};
    }
    Json operator()(const GameStarted& g) const {
      return {{"num_players", g.num_players}, {"player", g.player.value}, {"seed", g.seed},
              {"type", "GameStarted"}};
    }
    Json operator()(const Input& i) const {
      return {{"event", event_to_json(i.event)}, {"t_bits", i.t_bits}, {"type", "Input"}};
    }
    Json operator()(const Ping& p) const { return {{"t_bits", p.t_bits}, {"type", "Ping"}}; }
    Json operator()(const Relayed& r) const {
      return {{"event", event_to_json(r.event)}, {"player", r.player.value}, {"t_bits", r.t_bits},
              {"type", "Relayed"}};
    }
    Json operator()(const RelayedPing& r) const {
      return {{"player", r.player.value}, {"t_bits", r.t_bits}, {"type", "RelayedPing"}};
    }
    Json operator()(const ErrorFrame& e) const {
      return {{"code", error_code_name(e.code)}, {"detail", e.detail}, {"type", "Error"}};
    }
  } visitor;
  return std::visit(visitor, f);
}

inline Frame frame_from_json(const Json& j) {
  using namespace detail;
  if (!j.is_object()) schema_error("frame must be a JSON object");
  if (!j.contains("type") || !j.at("type").is_string()) schema_error("frame needs a string 'type'");
  const std::string type = j.at("type").get<std::string>();

  if (type == "ClientHello") {
    expect_keys(j, {"game_hash", "proto_version", "type"});
    std::string hash = get_string(j, "game_hash");
    if (!is_game_hash(hash)) schema_error("game_hash must be 64 lowercase hex digits");
    return ClientHello{static_cast<std::uint32_t>(get_u64(j, "proto_version", 0xFFFFFFFFu)), std::move(hash)};
  }
  if (type == "CreateGame") {
    expect_keys(j, {"num_players", "type"});
    const auto n = get_u8(j, "num_players");
    if (n == 0) schema_error("num_players must be positive");
    return CreateGame{n};
  }
  if (type == "GameCreated") {
    expect_keys(j, {"code", "type"});
    return GameCreated{checked_code(get_string(j, "code"))};
  }
  if (type == "JoinGame") {
    expect_keys(j, {"code", "type"});
    return JoinGame{checked_code(get_string(j, "code"))};
  }
  if (type == "Joined") {
    expect_keys(j, {"joined", "player", "total", "type"});
    Joined out{get_player(j, "player"), get_u8(j, "joined"), get_u8(j, "total")};
    if (out.joined > out.total || out.player.value >= out.total) schema_error("inconsistent join progress");
    return out;
  }
  if (type == "GameStarted") {
    expect_keys(j, {"num_players", "player", "seed", "type"});
    GameStarted out{get_player(j, "player"), get_u8(j, "num_players"), get_u64(j, "seed")};
    if (out.player.value >= out.num_players) schema_error("player outside the game");
    return out;
  }
  if (type == "Input") {
    expect_keys(j, {"event", "t_bits", "type"});
    return Input{get_u64(j, "t_bits"), event_from_json(j.at("event"))};
  }
  if (type == "Ping") {
    expect_keys(j, {"t_bits", "type"});
    return Ping{get_u64(j, "t_bits")};
  }
  if (type == "Relayed") {
    expect_keys(j, {"event", "player", "t_bits", "type"});
    return Relayed{get_u64(j, "t_bits"), get_player(j, "player"), event_from_json(j.at("event"))};
  }
  if (type == "RelayedPing") {
    expect_keys(j, {"player", "t_bits", "type"});
    return RelayedPing{get_u64(j, "t_bits"), get_player(j, "player")};
  }
  if (type == "Error") {
    expect_keys(j, {"code", "detail", "type"});
    return ErrorFrame{parse_error_code(get_string(j, "code")), get_string(j, "detail")};
  }
  throw ProtocolError(ProtocolError::Kind::UnknownType, "unknown frame type '" + type + "'");
}

/// Length-prefixed bytes for one frame. Throws ProtocolError if the frame is
/// malformed or its payload would exceed `cap` bytes.
inline Bytes encode_frame(const Frame& f, std::size_t cap = kMaxFrameBytes) {
  Json j = frame_to_json(f);
  frame_from_json(j);  // same validation as the receiving side
  std::string payload;
  try {
    payload = j.dump();
  } catch (const nlohmann::json::type_error& e) {
    throw ProtocolError(ProtocolError::Kind::Malformed, std::string("cannot encode frame: ") + e.what());
  }
  if (payload.size() > cap) {
    throw ProtocolError(ProtocolError::Kind::TooLarge,
                        "frame of " + std::to_string(payload.size()) + " bytes exceeds cap");
  }
  Bytes out(4 + payload.size());
  const auto n = static_cast<std::uint32_t>(payload.size());
  out[0] = static_cast<std::uint8_t>(n >> 24);
  out[1] = static_cast<std::uint8_t>(n >> 16);
  out[2] = static_cast<std::uint8_t>(n >> 8);
  out[3] = static_cast<std::uint8_t>(n);
  std::copy(payload.begin(), payload.end(), out.begin() + 4);
  return out;
}

namespace detail {

inline std::uint32_t read_length(std::span<const std::uint8_t> b) {
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

inline Frame decode_payload(std::span<const std::uint8_t> payload) {
  Json j;
  try {
    j = Json::parse(payload.begin(), payload.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(ProtocolError::Kind::Malformed, std::string("bad frame payload: ") + e.what());
  }
  try {
    return frame_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    schema_error(e.what());
  }
}

}  // namespace detail

/// Inverse of encode_frame. `bytes` must hold exactly one frame.
inline Frame decode_frame(std::span<const std::uint8_t> bytes, std::size_t cap = kMaxFrameBytes) {
  if (bytes.size() < 4) throw ProtocolError(ProtocolError::Kind::Truncated, "missing length prefix");
  const std::uint32_t n = detail::read_length(bytes);
  if (n > cap) throw ProtocolError(ProtocolError::Kind::TooLarge, "declared frame length exceeds cap");
  if (bytes.size() < 4 + std::size_t{n}) throw ProtocolError(ProtocolError::Kind::Truncated, "truncated frame");
  if (bytes.size() > 4 + std::size_t{n}) {
    throw ProtocolError(ProtocolError::Kind::BadLength, "trailing bytes after frame");
  }
  return detail::decode_payload(bytes.subspan(4));
}

/// Reassembles frames from a byte stream.
class FrameReader {
 public:
  explicit FrameReader(std::size_t cap = kMaxFrameBytes) : cap_(cap) {}

  void feed(std::span<const std::uint8_t> data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

  /// Next complete frame, if any. Throws ProtocolError on a bad frame; the
  /// stream cannot be resynchronised after that.
  std::optional<Frame> next() {
    if (buf_.size() - pos_ < 4) return std::nullopt;
    const std::span<const std::uint8_t> rest(buf_.data() + pos_, buf_.size() - pos_);
    const std::uint32_t n = detail::read_length(rest);
    if (n > cap_) throw ProtocolError(ProtocolError::Kind::TooLarge, "declared frame length exceeds cap");
    if (rest.size() < 4 + std::size_t{n}) return std::nullopt;
    Frame f = detail::decode_payload(rest.subspan(4, n));
    pos_ += 4 + n;
    if (pos_ == buf_.size()) {
      buf_.clear();
      pos_ = 0;
    } else if (pos_ > 1u << 16) {
      buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos_));
      pos_ = 0;
    }
    return f;
  }

  std::size_t buffered() const { return buf_.size() - pos_; }

 private:
  std::size_t cap_;
  Bytes buf_;
  std::size_t pos_ = 0;
};

}  // namespace lockstep::proto

#pragma once

// Client side of a game: stamps local input, ingests relayed frames, keeps
// the horizon moving with pings and serves render queries.
//
// A Session never touches a socket. Methods that produce traffic return the
// frame to send; create_or_join() drives the lobby over any Transport.

#include <chrono>
#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "lockstep/core/log.hpp"
#include "lockstep/core/smoothing.hpp"
#include "lockstep/core/state_cache.hpp"
#include "lockstep/proto/frame.hpp"
#include "lockstep/proto/game_hash.hpp"

namespace lockstep::session {

/// Seconds since the local GameStarted, from a monotonic source.
template <class C>
concept GameClock = requires(C c, const C& cc) {
  c.start();
  { cc.now() } -> std::same_as<Timestamp>;
};

class SteadyGameClock {
 public:
  void start() { epoch_ = std::chrono::steady_clock::now(); }
  Timestamp now() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_).count();
  }

 private:
  std::chrono::steady_clock::time_point epoch_ = std::chrono::steady_clock::now();
};

struct SessionOptions {
  double ping_interval = 1.0;
  double smoothing_window = kDefaultSmoothingWindow;
  // Hold back mouse movements so at most `max_move_rate` per second go out.
  bool coalesce_mouse = false;
  double max_move_rate = 30.0;
};

enum class SessionErrorCode {
  BadCode,
  GameFull,
  HashMismatch,
  OutOfOrder,
  ProtocolError,
  NotStarted,
  Fault,
};

class SessionError : public Error {
 public:
  SessionError(SessionErrorCode code, const std::string& what) : Error(what), code_(code) {}
  SessionErrorCode code() const { return code_; }

 private:
  SessionErrorCode code_;
};

inline SessionErrorCode to_session_error(proto::ErrorCode c) {
  switch (c) {
    case proto::ErrorCode::BadCode: return SessionErrorCode::BadCode;
    case proto::ErrorCode::GameFull: return SessionErrorCode::GameFull;
    case proto::ErrorCode::HashMismatch: return SessionErrorCode::HashMismatch;
    case proto::ErrorCode::OutOfOrder: return SessionErrorCode::OutOfOrder;
    case proto::ErrorCode::ProtocolError: return SessionErrorCode::ProtocolError;
  }
  return SessionErrorCode::ProtocolError;
}

template <GameRules R, GameClock C = SteadyGameClock>
class Session {
 public:
  using World = WorldOf<R>;

  explicit Session(R rules, C clock = C{}, SessionOptions options = {})
      : rules_(std::move(rules)), clock_(std::move(clock)), options_(options) {
    smoothing_.window = options_.smoothing_window;
  }

  bool started() const { return log_.has_value(); }
  PlayerId player() const { return player_; }
  const R& rules() const { return rules_; }
  const SessionOptions& options() const { return options_; }
  const std::optional<std::string>& room_code() const { return room_code_; }
  std::uint64_t seed() const { return seed_; }

  const Log<World>& log() const {
    require_started("log");
    return *log_;
  }
  const SmoothingBuffer& smoothing() const { return smoothing_; }
  Timestamp now() const { return clock_.now(); }
  C& clock() { return clock_; }

  /// Applies `event` locally at the current game time and returns the frame
  /// announcing it. With mouse coalescing on, a movement may be held back
  /// (nullopt) and goes out from a later tick() instead.
  std::optional<proto::Frame> submit_local(InputEvent event) {
    require_started("submit_local");
    if (options_.coalesce_mouse && std::holds_alternative<MouseMovement>(event)) {
      const Timestamp now = clock_.now();
      if (last_move_sent_ && now - *last_move_sent_ < 1.0 / options_.max_move_rate) {
        held_move_ = std::move(event);
        return std::nullopt;
      }
      held_move_.reset();
      last_move_sent_ = now;
    }
    return emit(std::move(event));
  }

  void on_frame(const proto::Frame& frame) {
    std::visit([this](const auto& f) { on(f); }, frame);
  }

  /// Sends a held mouse movement or, after ping_interval of silence, a ping.
  std::optional<proto::Frame> tick() {
    require_started("tick");
    const Timestamp now = clock_.now();
    smoothing_ = prune(std::move(smoothing_), now);
    if (held_move_ && now - last_move_sent_.value_or(0.0) >= 1.0 / options_.max_move_rate) {
      InputEvent e = std::move(*held_move_);
      held_move_.reset();
      last_move_sent_ = now;
      return emit(std::move(e));
    }
    if (now - last_activity_sent_ < options_.ping_interval) return std::nullopt;
    const Timestamp t = stamp(now);
    log_ = add_ping(rules_, t, player_, std::move(*log_));
    last_activity_sent_ = t;
    return proto::Ping{proto::timestamp_bits(t)};
  }

  /// Authoritative state at the current game time, cached between calls.
  World current() {
    require_started("current");
    auto [world, cache] = current_state_cached(rules_, clock_.now(), *log_, std::move(cache_));
    cache_ = std::move(cache);
    return world;
  }

  /// What to draw: current state with late remote events sliding into place.
  World smoothed() const {
    require_started("smoothed");
    return smoothed_state(rules_, clock_.now(), *log_, smoothing_);
  }

 private:
  void require_started(const char* what) const {
    if (!log_) throw SessionError(SessionErrorCode::NotStarted, std::string(what) + ": game not started");
  }

  // Clock anomalies are clamped; the log accepts equal timestamps.
  Timestamp stamp(Timestamp now) const {
    for (const auto& [p, t] : log_->latest) {
      if (p == player_) return std::max(now, t);
    }
    return now;
  }

  proto::Frame emit(InputEvent event) {
    const Timestamp t = stamp(clock_.now());
    log_ = add_event(rules_, Message{t, player_, event}, std::move(*log_));
    last_activity_sent_ = t;
    return proto::Input{proto::timestamp_bits(t), std::move(event)};
  }

  [[noreturn]] void fault(const std::string& what) const {
    throw SessionError(SessionErrorCode::Fault, "session fault: " + what);
  }

  template <class F>
  void ingest(F&& apply) {
    if (!log_) fault("game frame before GameStarted");
    try {
      log_ = apply(std::move(*log_));
    } catch (const OutOfOrder& e) {
      throw SessionError(SessionErrorCode::OutOfOrder, std::string("session fault: ") + e.what());
    } catch (const InvalidArgument& e) {
      fault(e.what());
    }
  }

  void on(const proto::GameCreated& f) { room_code_ = f.code; }
  void on(const proto::Joined& f) { player_ = f.player; }

  void on(const proto::GameStarted& f) {
    if (log_) fault("duplicate GameStarted");
    if (f.num_players != rules_.num_players()) {
      throw SessionError(SessionErrorCode::ProtocolError,
                         "room has " + std::to_string(f.num_players) + " players, rules expect " +
                             std::to_string(rules_.num_players()));
    }
    player_ = f.player;
    seed_ = f.seed;
    clock_.start();
    log_ = init_log(rules_, f.seed);
    last_activity_sent_ = 0.0;
  }

  void on(const proto::Relayed& f) {
    if (f.player == player_) fault("relay echoed our own event");
    Message msg{proto::timestamp_from_bits(f.t_bits), f.player, f.event};
    ingest([&](Log<World> log) { return add_event(rules_, msg, std::move(log)); });
    smoothing_ = note_arrival(std::move(msg), clock_.now(), std::move(smoothing_));
  }

  void on(const proto::RelayedPing& f) {
    if (f.player == player_) fault("relay echoed our own ping");
    const Timestamp t = proto::timestamp_from_bits(f.t_bits);
    ingest([&](Log<World> log) { return add_ping(rules_, t, f.player, std::move(log)); });
  }

  void on(const proto::ErrorFrame& f) {
    throw SessionError(to_session_error(f.code),
                       std::string(proto::error_code_name(f.code)) + ": " + f.detail);
  }

  // Client-to-server frames.
  template <class F>
  void on(const F&) {
    fault("unexpected frame from relay");
  }

  R rules_;
  C clock_;
  SessionOptions options_;
  PlayerId player_;
  std::uint64_t seed_ = 0;
  std::optional<std::string> room_code_;
  std::optional<Log<World>> log_;
  StateCache<World> cache_;
  SmoothingBuffer smoothing_;
  Timestamp last_activity_sent_ = 0.0;
  std::optional<Timestamp> last_move_sent_;
  std::optional<InputEvent> held_move_;
};

template <class T>
concept Transport = requires(T t, const proto::Frame& f) {
  t.send(f);
  { t.receive() } -> std::same_as<proto::Frame>;
};

struct Create {
  std::uint8_t num_players = 2;
};
struct Join {
  std::string code;
};
using Role = std::variant<Create, Join>;

/// Lobby handshake: hello, create or join, then block until GameStarted.
/// `on_lobby_frame` sees every frame received before the start (room code,
/// join progress), e.g. to show the code to the creator.
template <Transport T, GameRules R, GameClock C = SteadyGameClock, class OnLobby = void (*)(const proto::Frame&)>
Session<R, C> create_or_join(T& transport, R rules, std::string_view rules_identity, const Role& role,
                             C clock = C{}, SessionOptions options = {},
                             OnLobby on_lobby_frame = [](const proto::Frame&) {}) {
  Session<R, C> session(std::move(rules), std::move(clock), options);
  transport.send(proto::ClientHello{proto::kProtocolVersion,
                                    proto::game_hash(rules_identity, proto::kProtocolVersion)});
  if (const auto* create = std::get_if<Create>(&role)) {
    transport.send(proto::CreateGame{create->num_players});
  } else {
    transport.send(proto::JoinGame{std::get<Join>(role).code});
  }
  while (!session.started()) {
    proto::Frame f = transport.receive();
    on_lobby_frame(f);
    session.on_frame(f);
  }
  return session;
}

}  // namespace lockstep::session

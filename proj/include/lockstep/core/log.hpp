#pragma once

// Event log with commit horizon.
//
// Every client keeps the full history of inputs that could still matter:
// a committed snapshot (world folded up to the last event that can no longer
// be preceded by anything) plus the pending events after it, sorted by
// (timestamp, player). The latest activity time of every player bounds what
// may still arrive; the minimum of those is the commit horizon.
//
// All functions are pure value transformations: they take a Log by value and
// return the new one. A failed call throws and leaves the caller's Log intact.

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lockstep/core/game_rules.hpp"
#include "lockstep/core/types.hpp"
#include "lockstep/error.hpp"

namespace lockstep {

template <class World>
struct Snapshot {
  Timestamp t = 0.0;
  World world;
};

template <class World>
struct Log {
  Snapshot<World> committed;
  std::vector<Message> events;                            // sorted by (t, player)
  std::vector<std::pair<PlayerId, Timestamp>> latest;  // sorted by player
  // Fresh value on every mutation; copies share it. Used to validate caches.
  std::uint64_t revision = 0;
};

namespace detail {

inline std::uint64_t next_revision() {
  static std::atomic<std::uint64_t> counter{0};
  return counter.fetch_add(1, std::memory_order_relaxed) + 1;
}

inline bool message_before(const Message& a, const Message& b) {
  if (a.t != b.t) return a.t < b.t;
  return a.player < b.player;
}

inline void require_finite(Timestamp t, const char* what) {
  if (!std::isfinite(t)) throw InvalidArgument(std::string(what) + ": timestamp must be finite");
}

template <class World>
auto find_latest(Log<World>& log, PlayerId p) {
  auto it = std::lower_bound(log.latest.begin(), log.latest.end(), p,
                             [](const auto& entry, PlayerId id) { return entry.first < id; });
  if (it == log.latest.end() || it->first != p) {
    throw InvalidArgument("unknown player " + std::to_string(p.value));
  }
  return it;
}

// Number of pending events with t <= now.
template <class World>
std::size_t past_event_count(const Log<World>& log, Timestamp now) {
  auto it = std::partition_point(log.events.begin(), log.events.end(),
                                 [now](const Message& m) { return m.t <= now; });
  return static_cast<std::size_t>(it - log.events.begin());
}

}  // namespace detail

/// Stable sort by (timestamp, player).
inline std::vector<Message> sort_messages(std::vector<Message> msgs) {
  std::stable_sort(msgs.begin(), msgs.end(), detail::message_before);
  return msgs;
}

/// Advances `world` by `dt` seconds in slices of at most kGameRate.
/// dt <= 0 leaves the world untouched.
template <GameRules R>
WorldOf<R> game_step(const R& rules, double dt, WorldOf<R> world) {
  while (dt > kGameRate) {
    world = rules.step(kGameRate, std::move(world));
    dt -= kGameRate;
  }
  if (dt > 0.0) world = rules.step(dt, std::move(world));
  return world;
}

/// Left fold: step over each gap, then handle the message.
template <GameRules R>
Snapshot<WorldOf<R>> apply_events(const R& rules, std::span<const Message> msgs,
                                  Snapshot<WorldOf<R>> basis) {
  for (const Message& m : msgs) {
    assert(m.t >= basis.t);
    basis.world = rules.handle(m.player, m.event, game_step(rules, m.t - basis.t, std::move(basis.world)));
    basis.t = m.t;
  }
  return basis;
}

template <GameRules R>
Log<WorldOf<R>> init_log(const R& rules, std::span<const PlayerId> players, std::uint64_t seed) {
  if (players.empty()) throw InvalidArgument("init_log: player list is empty");
  Log<WorldOf<R>> log{{0.0, rules.start(seed)}, {}, {}, detail::next_revision()};
  log.latest.reserve(players.size());
  for (PlayerId p : players) log.latest.emplace_back(p, 0.0);
  std::sort(log.latest.begin(), log.latest.end());
  auto dup = std::adjacent_find(log.latest.begin(), log.latest.end(),
                                [](const auto& a, const auto& b) { return a.first == b.first; });
  if (dup != log.latest.end()) {
    throw InvalidArgument("init_log: duplicate player " + std::to_string(dup->first.value));
  }
  return log;
}

/// Players 0 .. rules.num_players()-1.
template <GameRules R>
Log<WorldOf<R>> init_log(const R& rules, std::uint64_t seed) {
  std::vector<PlayerId> players(static_cast<std::size_t>(rules.num_players()));
  for (std::size_t i = 0; i < players.size(); ++i) players[i] = PlayerId{static_cast<std::uint32_t>(i)};
  return init_log(rules, std::span<const PlayerId>(players), seed);
}

/// Minimum over every player's latest activity time.
template <class World>
Timestamp commit_horizon(const Log<World>& log) {
  assert(!log.latest.empty());
  Timestamp h = log.latest.front().second;
  for (const auto& [p, t] : log.latest) h = std::min(h, t);
  return h;
}

/// Folds every pending event strictly before the horizon into the snapshot.
template <GameRules R>
Log<WorldOf<R>> advance_committed(const R& rules, Log<WorldOf<R>> log) {
  const Timestamp horizon = commit_horizon(log);
  auto keep = std::partition_point(log.events.begin(), log.events.end(),
                                   [horizon](const Message& m) { return m.t < horizon; });
  if (keep == log.events.begin()) return log;
  const auto n = static_cast<std::size_t>(keep - log.events.begin());
  log.committed = apply_events(rules, std::span<const Message>(log.events.data(), n),
                               std::move(log.committed));
  log.events.erase(log.events.begin(), keep);
  return log;
}

template <GameRules R>
Log<WorldOf<R>> record_activity(const R& rules, Timestamp t, PlayerId p, Log<WorldOf<R>> log) {
  detail::require_finite(t, "record_activity");
  auto it = detail::find_latest(log, p);
  if (t < it->second) {
    throw OutOfOrder("player " + std::to_string(p.value) + " went from " +
                     std::to_string(it->second) + " to " + std::to_string(t));
  }
  it->second = t;
  log.revision = detail::next_revision();
  return advance_committed(rules, std::move(log));
}

template <GameRules R>
Log<WorldOf<R>> add_event(const R& rules, Message msg, Log<WorldOf<R>> log) {
  detail::require_finite(msg.t, "add_event");
  if (!is_valid(msg.event)) throw InvalidArgument("add_event: malformed input event");
  // Validate before touching the event list so errors cannot leave a stray event.
  auto it = detail::find_latest(log, msg.player);
  if (msg.t < it->second) {
    throw OutOfOrder("player " + std::to_string(msg.player.value) + " sent " +
                     std::to_string(msg.t) + " after " + std::to_string(it->second));
  }
  const Timestamp t = msg.t;
  const PlayerId p = msg.player;
  auto pos = std::upper_bound(log.events.begin(), log.events.end(), msg, detail::message_before);
  log.events.insert(pos, std::move(msg));
  return record_activity(rules, t, p, std::move(log));
}

template <GameRules R>
Log<WorldOf<R>> add_ping(const R& rules, Timestamp t, PlayerId p, Log<WorldOf<R>> log) {
  return record_activity(rules, t, p, std::move(log));
}

namespace detail {

template <class World>
void check_query(const Log<World>& log, Timestamp now) {
  if (std::isnan(now)) throw InvalidArgument("state query at NaN");
  if (now < commit_horizon(log)) throw PastQuery();
}

}  // namespace detail

/// World as of `now`, including every pending event with t <= now.
template <GameRules R>
WorldOf<R> current_state(const R& rules, Timestamp now, const Log<WorldOf<R>>& log) {
  detail::check_query(log, now);
  const std::size_t n = detail::past_event_count(log, now);
  auto basis = apply_events(rules, std::span<const Message>(log.events.data(), n), log.committed);
  return game_step(rules, now - basis.t, std::move(basis.world));
}

}  // namespace lockstep

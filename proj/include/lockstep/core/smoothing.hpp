#pragma once

// Time-sliding of late remote events.
//
// A remote event that arrives after its own timestamp is first rendered as if
// it happened on arrival, then slid back to its real time over a short window.
// Only rendering uses this; the authoritative Log is never touched.

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <utility>
#include <vector>

#include "lockstep/core/log.hpp"

namespace lockstep {

inline constexpr double kDefaultSmoothingWindow = 0.25;

struct SmoothingEntry {
  Message msg;
  Timestamp arrival = 0.0;  // local game time at receipt
};

struct SmoothingBuffer {
  std::vector<SmoothingEntry> entries;
  double window = kDefaultSmoothingWindow;
};

/// Slides linearly from `arrival` at now == arrival to msg.t at
/// now == arrival + window. Never earlier than msg.t, never later than
/// max(msg.t, arrival), non-increasing in `now`.
inline bool window_elapsed(const SmoothingEntry& entry, Timestamp now, double window) {
  // Either form alone can round the wrong way at the boundary.
  return now >= entry.arrival + window || now - entry.arrival >= window;
}

inline Timestamp apparent_time(const SmoothingEntry& entry, Timestamp now, double window) {
  assert(window > 0.0);
  const Timestamp actual = entry.msg.t;
  if (window_elapsed(entry, now, window)) return actual;
  const double f = std::clamp((now - entry.arrival) / window, 0.0, 1.0);
  return std::max(entry.arrival + (actual - entry.arrival) * f, actual);
}

/// Drops entries whose slide has finished by `now`.
inline SmoothingBuffer prune(SmoothingBuffer buf, Timestamp now) {
  std::erase_if(buf.entries, [&](const SmoothingEntry& e) { return window_elapsed(e, now, buf.window); });
  return buf;
}

inline SmoothingBuffer note_arrival(Message msg, Timestamp local_now, SmoothingBuffer buf) {
  if (!(buf.window > 0.0)) throw InvalidArgument("smoothing window must be positive");
  buf = prune(std::move(buf), local_now);
  buf.entries.push_back({std::move(msg), local_now});
  return buf;
}

/// current_state with every still-sliding pending event moved to its
/// apparent time. Converges bit-exactly to current_state once every window
/// has elapsed.
template <GameRules R>
WorldOf<R> smoothed_state(const R& rules, Timestamp now, const Log<WorldOf<R>>& log,
                          const SmoothingBuffer& buf) {
  detail::check_query(log, now);
  if (!(buf.window > 0.0)) throw InvalidArgument("smoothing window must be positive");

  std::vector<Message> shifted(log.events);
  std::vector<bool> matched(shifted.size(), false);
  bool any = false;
  for (const SmoothingEntry& entry : buf.entries) {
    if (window_elapsed(entry, now, buf.window)) continue;
    // Equal messages are indistinguishable; pair them with entries in order.
    for (std::size_t i = 0; i < shifted.size(); ++i) {
      if (!matched[i] && log.events[i] == entry.msg) {
        matched[i] = true;
        shifted[i].t = apparent_time(entry, now, buf.window);
        any = true;
        break;
      }
    }
  }
  if (!any) return current_state(rules, now, log);

  std::erase_if(shifted, [now](const Message& m) { return m.t > now; });
  std::stable_sort(shifted.begin(), shifted.end(), detail::message_before);
  auto basis = apply_events(rules, std::span<const Message>(shifted), log.committed);
  return game_step(rules, now - basis.t, std::move(basis.world));
}

}  // namespace lockstep

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>

#include "lockstep/core/log.hpp"

namespace lockstep {

/// Fold of the committed snapshot over a prefix of the pending events,
/// remembered between render queries. Valid only for the Log revision it
/// was computed from.
template <class World>
struct StateCache {
  std::uint64_t revision = 0;
  std::optional<Snapshot<World>> basis;
  std::size_t folded = 0;  // pending events folded into `basis`
};

/// Same result as current_state, bit for bit.
///
/// The final game_step is always taken from the last event's timestamp, never
/// from an earlier render, so the chop boundaries match the uncached path.
template <GameRules R>
std::pair<WorldOf<R>, StateCache<WorldOf<R>>> current_state_cached(
    const R& rules, Timestamp now, const Log<WorldOf<R>>& log, StateCache<WorldOf<R>> cache) {
  detail::check_query(log, now);
  const std::size_t n = detail::past_event_count(log, now);
  const bool reusable = cache.basis && cache.revision == log.revision && cache.folded <= n;
  if (!reusable) {
    cache.revision = log.revision;
    cache.basis = log.committed;
    cache.folded = 0;
  }
  cache.basis = apply_events(
      rules, std::span<const Message>(log.events.data() + cache.folded, n - cache.folded),
      std::move(*cache.basis));
  cache.folded = n;
  WorldOf<R> world = game_step(rules, now - cache.basis->t, cache.basis->world);
  return {std::move(world), std::move(cache)};
}

}  // namespace lockstep

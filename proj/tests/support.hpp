#pragma once

// Shared fixtures: instrumented rules and random activity generation.

#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lockstep/core/log.hpp"
#include "lockstep/det/det_rng.hpp"
#include "lockstep/sim/interleavings.hpp"
#include "lockstep/sim/rules.hpp"

namespace support {

using namespace lockstep;

/// Records every dt passed to step and counts handle calls.
struct RecordingRules {
  struct Calls {
    std::vector<double> steps;
    std::uint64_t handles = 0;
  };
  using World = std::uint64_t;

  std::shared_ptr<Calls> calls = std::make_shared<Calls>();
  std::size_t players = 2;

  std::size_t num_players() const { return players; }
  World start(std::uint64_t) const { return 0; }
  World step(double dt, World w) const {
    calls->steps.push_back(dt);
    return w + 1;
  }
  World handle(PlayerId, const InputEvent&, World w) const {
    ++calls->handles;
    return w;
  }
  std::uint64_t digest(const World& w) const { return w; }
};

inline InputEvent random_event(det::DetRng& rng) {
  switch (rng.below(5)) {
    case 0: return KeyPress{std::string(1, static_cast<char>('a' + rng.below(26)))};
    case 1: return KeyRelease{std::string(1, static_cast<char>('a' + rng.below(26)))};
    case 2: return MousePress{MouseButton::Left, Point{rng.uniform(-5, 5), rng.uniform(-5, 5)}};
    case 3: return MouseRelease{MouseButton::Right, Point{rng.uniform(-5, 5), rng.uniform(-5, 5)}};
    default: return MouseMovement{Point{rng.uniform(-5, 5), rng.uniform(-5, 5)}};
  }
}

/// Per-player monotone activity. Times sit on a coarse grid part of the time
/// so that equal timestamps, within and across players, are common.
inline sim::ActivityLists random_lists(det::DetRng& rng, std::size_t players, std::size_t per_player,
                                       double max_gap = 0.5) {
  sim::ActivityLists lists(players);
  for (auto& list : lists) {
    double t = 0.0;
    for (std::size_t i = 0; i < per_player; ++i) {
      if (rng.below(3) == 0) {
        t = (std::ceil(t * 8.0) + static_cast<double>(rng.below(3))) / 8.0;
      } else {
        t += rng.uniform(0.0, max_gap);
      }
      sim::Activity a{t, std::nullopt};
      if (rng.below(4) != 0) a.event = random_event(rng);
      list.push_back(std::move(a));
    }
  }
  return lists;
}

/// A random merge that respects each player's order.
inline std::vector<std::size_t> random_merge(det::DetRng& rng, const sim::ActivityLists& lists) {
  std::vector<std::size_t> order = sim::player_tokens(lists);
  for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
  return order;
}

inline bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

inline bool same_world(const sim::CounterRules::World& a, const sim::CounterRules::World& b) {
  return a.steps == b.steps && a.handled == b.handled && same_bits(a.elapsed, b.elapsed) && a.trace == b.trace;
}

}  // namespace support

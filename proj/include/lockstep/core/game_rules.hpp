#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <utility>

#include "lockstep/core/types.hpp"

namespace lockstep {

/// What an application supplies to the engine. All three functions must be
/// deterministic down to the bit on every platform; the engine never looks
/// inside `World`.
///
///   start(seed)          initial world for a server-chosen seed
///   step(dt, world)      advance by dt seconds, 0 < dt <= kGameRate
///   handle(p, e, world)  apply player p's input
template <class R>
concept GameRules =
    std::copy_constructible<typename R::World> &&
    requires(const R& rules, typename R::World world, double dt, PlayerId p,
             const InputEvent& e, std::uint64_t seed) {
      { rules.num_players() } -> std::convertible_to<std::size_t>;
      { rules.start(seed) } -> std::same_as<typename R::World>;
      { rules.step(dt, std::move(world)) } -> std::same_as<typename R::World>;
      { rules.handle(p, e, std::move(world)) } -> std::same_as<typename R::World>;
    };

/// Rules that can fingerprint a world. Only tests and the simulator need
/// this; the engine itself never compares worlds.
template <class R>
concept DigestRules = GameRules<R> && requires(const R& rules, const typename R::World& w) {
  { rules.digest(w) } -> std::same_as<std::uint64_t>;
};

template <GameRules R>
using WorldOf = typename R::World;

}  // namespace lockstep

#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include "lockstep/error.hpp"
#include "lockstep/sim/pendulum.hpp"
#include "lockstep/sim/rules.hpp"

namespace lockstep::sim {

/// Calls `f` with the rules named `id` ("counter", "column", "dot-trace",
/// "pendulum" or "pendulum-native") and returns its result.
template <class F>
decltype(auto) with_rules(const std::string& id, std::size_t players, F&& f) {
  if (id == "counter") return std::forward<F>(f)(CounterRules{players});
  if (id == "column") return std::forward<F>(f)(ColumnRules{players});
  if (id == "dot-trace") return std::forward<F>(f)(DotTraceRules{players});
  if (id == "pendulum" || id == "pendulum-native") {
    if (players != 2) throw InvalidArgument("pendulum rules are for exactly 2 players");
    if (id == "pendulum") return std::forward<F>(f)(PendulumRules<DetMath>{});
    return std::forward<F>(f)(PendulumRules<NativeMath>{});
  }
  throw InvalidArgument("unknown rules '" + id + "'");
}

}  // namespace lockstep::sim

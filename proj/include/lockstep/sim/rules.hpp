#pragma once

// Small games used by the simulator, the tests and the CLI.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lockstep/core/digest.hpp"
#include "lockstep/core/game_rules.hpp"
#include "lockstep/det/det_math.hpp"

namespace lockstep::sim {

/// Records every call in an order-sensitive trace. Any difference in the
/// sequence of step/handle calls shows up in the digest.
struct CounterRules {
  struct World {
    std::uint64_t steps = 0;
    std::uint64_t handled = 0;
    double elapsed = 0.0;
    std::uint64_t trace = 0;
  };

  std::size_t players = 2;

  std::size_t num_players() const { return players; }
  World start(std::uint64_t seed) const { return World{0, 0, 0.0, seed}; }
  World step(double dt, World w) const {
    ++w.steps;
    w.elapsed += dt;
    w.trace = Digest().add(w.trace).add(dt).value();
    return w;
  }
  World handle(PlayerId p, const InputEvent& e, World w) const {
    ++w.handled;
    w.trace = Digest().add(w.trace).add(p).add(e).add(w.elapsed).value();
    return w;
  }
  std::uint64_t digest(const World& w) const {
    return Digest().add(w.steps).add(w.handled).add(w.elapsed).add(w.trace).value();
  }
};

/// A column grows at one unit per second; a digit key recolours it from the
/// current height upward.
struct ColumnRules {
  struct Band {
    double from = 0.0;
    int color = 0;
  };
  struct World {
    double height = 0.0;
    std::uint64_t steps = 0;
    std::vector<Band> bands{Band{}};
  };

  std::size_t players = 2;

  std::size_t num_players() const { return players; }
  World start(std::uint64_t) const { return World{}; }
  World step(double dt, World w) const {
    w.height += dt;
    ++w.steps;
    return w;
  }
  World handle(PlayerId, const InputEvent& e, World w) const {
    const auto* key = std::get_if<KeyPress>(&e);
    if (key && key->key.size() == 1 && key->key[0] >= '0' && key->key[0] <= '9') {
      w.bands.push_back(Band{w.height, key->key[0] - '0'});
    }
    return w;
  }
  std::uint64_t digest(const World& w) const {
    Digest d;
    d.add(w.height).add(w.steps);
    for (const Band& b : w.bands) d.add(b.from).add(static_cast<std::uint64_t>(b.color));
    return d.value();
  }
};

/// Two players trace dots with the mouse; dots shrink by e^-dt per step and
/// vanish below radius 0.1.
struct DotTraceRules {
  enum class Color : std::uint8_t { Red, Green };
  struct Dot {
    Color color = Color::Red;
    double r = 1.0;
    double x = 0.0;
    double y = 0.0;
  };
  struct World {
    std::vector<Dot> dots;  // newest first
  };

  std::size_t players = 2;

  std::size_t num_players() const { return players; }
  World start(std::uint64_t) const { return World{}; }
  World step(double dt, World w) const {
    const double k = det::det_exp(-dt);
    std::vector<Dot> kept;
    kept.reserve(w.dots.size());
    for (Dot d : w.dots) {
      d.r *= k;
      if (d.r >= 0.1) kept.push_back(d);
    }
    w.dots = std::move(kept);
    return w;
  }
  World handle(PlayerId p, const InputEvent& e, World w) const {
    const auto* move = std::get_if<MouseMovement>(&e);
    if (!move || p.value > 1) return w;
    const Color c = p.value == 0 ? Color::Red : Color::Green;
    w.dots.insert(w.dots.begin(), Dot{c, 1.0, move->at.x, move->at.y});
    return w;
  }
  std::uint64_t digest(const World& w) const {
    Digest d;
    d.add(static_cast<std::uint64_t>(w.dots.size()));
    for (const Dot& dot : w.dots) d.add(static_cast<std::uint64_t>(dot.color)).add(dot.r).add(dot.x).add(dot.y);
    return d.value();
  }
};

struct CallCounts {
  std::uint64_t step = 0;
  std::uint64_t handle = 0;
};

/// Forwards to `inner` and counts calls. The counters live outside the world,
/// so the wrapped rules stay deterministic.
template <GameRules R>
struct Counted {
  using World = WorldOf<R>;

  R inner;
  std::shared_ptr<CallCounts> counts = std::make_shared<CallCounts>();

  std::size_t num_players() const { return inner.num_players(); }
  World start(std::uint64_t seed) const { return inner.start(seed); }
  World step(double dt, World w) const {
    ++counts->step;
    return inner.step(dt, std::move(w));
  }
  World handle(PlayerId p, const InputEvent& e, World w) const {
    ++counts->handle;
    return inner.handle(p, e, std::move(w));
  }
  std::uint64_t digest(const World& w) const
    requires DigestRules<R>
  {
    return inner.digest(w);
  }
};

}  // namespace lockstep::sim

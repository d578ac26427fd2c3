#pragma once

// Double pendulum: a chaotic system that magnifies any difference in sin/cos
// results into a visibly different trajectory.

#include <cmath>
#include <cstdint>
#include <utility>
#include <variant>

#include "lockstep/core/digest.hpp"
#include "lockstep/core/log.hpp"
#include "lockstep/det/det_math.hpp"
#include "lockstep/det/det_rng.hpp"

namespace lockstep::sim {

struct DetMath {
  static double sin(double x) { return det::det_sin(x); }
  static double cos(double x) { return det::det_cos(x); }
};

struct NativeMath {
  static double sin(double x) { return std::sin(x); }
  static double cos(double x) { return std::cos(x); }
};

template <class Math>
struct PendulumRules {
  struct World {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double omega1 = 0.0;
    double omega2 = 0.0;
    std::uint64_t trace = 0;  // digest of every visited state
  };

  // Unit masses and arms.
  static constexpr double kGravity = 9.81;
  static constexpr int kSubsteps = 4;
  static constexpr double kKick = 0.5;

  std::size_t num_players() const { return 2; }

  World start(std::uint64_t seed) const {
    det::DetRng rng(seed);
    World w;
    w.theta1 = rng.uniform(1.0, 3.0);
    w.theta2 = rng.uniform(1.0, 3.0);
    return w;
  }

  // Semi-implicit Euler: velocities first, then positions with the new
  // velocities. Keeps the energy bounded over long runs.
  World step(double dt, World w) const {
    const double h = dt / kSubsteps;
    for (int i = 0; i < kSubsteps; ++i) {
      const double delta = w.theta1 - w.theta2;
      const double sd = Math::sin(delta);
      const double cd = Math::cos(delta);
      const double den = 3.0 - Math::cos(2.0 * delta);
      const double a1 = (-3.0 * kGravity * Math::sin(w.theta1) -
                         kGravity * Math::sin(w.theta1 - 2.0 * w.theta2) -
                         2.0 * sd * (w.omega2 * w.omega2 + w.omega1 * w.omega1 * cd)) /
                        den;
      const double a2 = 2.0 * sd *
                        (2.0 * w.omega1 * w.omega1 + 2.0 * kGravity * Math::cos(w.theta1) +
                         w.omega2 * w.omega2 * cd) /
                        den;
      w.omega1 += a1 * h;
      w.omega2 += a2 * h;
      w.theta1 += w.omega1 * h;
      w.theta2 += w.omega2 * h;
    }
    w.trace = Digest().add(w.trace).add(w.theta1).add(w.theta2).value();
    return w;
  }

  // Any key from player p kicks arm p.
  World handle(PlayerId p, const InputEvent& e, World w) const {
    if (!std::holds_alternative<KeyPress>(e)) return w;
    if (p.value == 0) w.omega1 += kKick;
    if (p.value == 1) w.omega2 += kKick;
    return w;
  }

  std::uint64_t digest(const World& w) const {
    return Digest().add(w.theta1).add(w.theta2).add(w.omega1).add(w.omega2).add(w.trace).value();
  }
};

/// Runs two independent engines over `steps` game-rate steps with the same
/// kicks fed in opposite interleavings; returns both final digests.
template <class Math>
std::pair<std::uint64_t, std::uint64_t> double_pendulum_run(std::uint64_t steps, std::uint64_t seed = 7) {
  const PendulumRules<Math> rules;
  const Timestamp end = static_cast<double>(steps) * kGameRate;
  const std::pair<Timestamp, PlayerId> kicks[] = {
      {0.5, PlayerId{0}}, {0.5, PlayerId{1}}, {3.0, PlayerId{1}}, {10.0, PlayerId{0}}, {42.0, PlayerId{1}}};

  auto run = [&](bool player1_first) {
    auto log = init_log(rules, seed);
    auto feed = [&](PlayerId who) {
      for (const auto& [t, p] : kicks) {
        if (p == who && t <= end) log = add_event(rules, Message{t, p, KeyPress{"k"}}, std::move(log));
      }
    };
    feed(PlayerId{player1_first ? 1u : 0u});
    feed(PlayerId{player1_first ? 0u : 1u});
    return rules.digest(current_state(rules, end, log));
  };
  return {run(false), run(true)};
}

inline std::pair<std::uint64_t, std::uint64_t> double_pendulum_scenario(std::uint64_t steps, bool use_det_math) {
  return use_det_math ? double_pendulum_run<DetMath>(steps) : double_pendulum_run<NativeMath>(steps);
}

}  // namespace lockstep::sim

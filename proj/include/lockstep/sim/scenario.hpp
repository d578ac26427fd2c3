#pragma once

// Scenario description for the simulator, and its JSON file format.
//
// {
//   "rules": "dot-trace",            // dot-trace | column | counter | pendulum
//   "players": 2,
//   "seed": 42,                      // game seed the relay would hand out
//   "duration": 10.0,                // scripted input lies in [0, duration)
//   "ping_interval": 1.0,
//   "smoothing_window": 0.25,
//   "tick": 0.0166,                  // client tick / render period
//   "net": {"kind": "fixed", "latency": 0.1}
//        | {"kind": "jitter", "min": 0.02, "max": 0.25, "seed": 7},
//   "start_offsets": [0.0, 0.03],    // optional, per player
//   "samples": [1.0, 2.5],           // game times at which digests are taken
//   "scripts": [                     // one list per player, times non-decreasing
//     [{"at": 0.5, "event": {"kind": "MouseMovement", "x": 1.0, "y": 2.0}}],
//     [{"at": 0.7, "event": {"kind": "KeyPress", "text": "3"}}]
//   ],
//   "generate": {"rate": 5.0, "seed": 3}   // optional: random scripts instead
// }
//
// Unlike the wire format, coordinates here are plain JSON numbers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lockstep/core/types.hpp"
#include "lockstep/det/det_rng.hpp"
#include "lockstep/error.hpp"

namespace lockstep::sim {

struct FixedLatency {
  double seconds = 0.0;
};

struct JitterLatency {
  double min = 0.0;
  double max = 0.0;
  std::uint64_t seed = 0;
};

using NetModel = std::variant<FixedLatency, JitterLatency>;

struct ScriptedInput {
  Timestamp at = 0.0;  // client game time
  InputEvent event;
};

struct Scenario {
  std::string rules_id = "dot-trace";
  std::size_t num_players = 2;
  std::uint64_t seed = 0;
  std::vector<std::vector<ScriptedInput>> scripts;
  double duration = 10.0;
  double ping_interval = 1.0;
  double smoothing_window = 0.25;
  double tick = 1.0 / 60.0;
  NetModel net = FixedLatency{0.0};
  std::vector<Timestamp> samples;
  std::vector<double> start_offsets;  // empty: everyone starts together
  bool render_on_tick = true;

  double offset(std::size_t player) const { return start_offsets.empty() ? 0.0 : start_offsets[player]; }
  double max_offset() const {
    return start_offsets.empty() ? 0.0 : *std::max_element(start_offsets.begin(), start_offsets.end());
  }
};

inline void validate(const Scenario& sc) {
  auto fail = [](const std::string& what) { throw InvalidArgument("scenario: " + what); };
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (sc.num_players == 0) fail("needs at least one player");
  if (sc.scripts.size() != sc.num_players) fail("need exactly one script per player");
  if (!(std::isfinite(sc.duration) && sc.duration > 0.0)) fail("duration must be positive");
  if (!(std::isfinite(sc.ping_interval) && sc.ping_interval > 0.0)) fail("ping_interval must be positive");
  if (!(std::isfinite(sc.smoothing_window) && sc.smoothing_window > 0.0)) fail("smoothing_window must be positive");
  if (!(std::isfinite(sc.tick) && sc.tick > 0.0)) fail("tick must be positive");
  if (!sc.start_offsets.empty()) {
    if (sc.start_offsets.size() != sc.num_players) fail("need one start offset per player");
    for (double o : sc.start_offsets) {
      if (!finite_nonneg(o)) fail("start offsets must be finite and >= 0");
    }
  }
  if (const auto* f = std::get_if<FixedLatency>(&sc.net)) {
    if (!finite_nonneg(f->seconds)) fail("latency must be finite and >= 0");
  } else {
    const auto& j = std::get<JitterLatency>(sc.net);
    if (!finite_nonneg(j.min) || !finite_nonneg(j.max) || j.min > j.max) fail("jitter needs 0 <= min <= max");
  }
  for (const auto& script : sc.scripts) {
    Timestamp prev = 0.0;
    for (const ScriptedInput& in : script) {
      if (!(in.at >= 0.0 && in.at < sc.duration)) fail("script time outside [0, duration)");
      if (in.at < prev) fail("script times must be non-decreasing");
      if (!is_valid(in.event)) fail("malformed scripted event");
      prev = in.at;
    }
  }
  for (Timestamp s : sc.samples) {
    if (!finite_nonneg(s)) fail("sample times must be finite and >= 0");
  }
}

/// Random mix of mouse movements and key presses, Poisson-ish at `rate`
/// events per second over [0, duration).
inline std::vector<ScriptedInput> random_script(det::DetRng& rng, double duration, double rate) {
  std::vector<ScriptedInput> out;
  if (rate <= 0.0) return out;
  Timestamp t = 0.0;
  for (;;) {
    t += rng.uniform(0.0, 2.0 / rate);
    if (t >= duration) break;
    if (rng.below(4) == 0) {
      out.push_back({t, KeyPress{std::string(1, static_cast<char>('0' + rng.below(10)))}});
    } else {
      out.push_back({t, MouseMovement{Point{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)}}});
    }
  }
  return out;
}

namespace detail {

using Json = nlohmann::json;

inline InputEvent scenario_event(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  auto point = [&] { return Point{j.at("x").get<double>(), j.at("y").get<double>()}; };
  auto button = [&] {
    const std::string b = j.value("button", "Left");
    if (b == "Middle") return MouseButton::Middle;
    if (b == "Right") return MouseButton::Right;
    return MouseButton::Left;
  };
  if (kind == "KeyPress") return KeyPress{j.at("text").get<std::string>()};
  if (kind == "KeyRelease") return KeyRelease{j.at("text").get<std::string>()};
  if (kind == "MousePress") return MousePress{button(), point()};
  if (kind == "MouseRelease") return MouseRelease{button(), point()};
  if (kind == "MouseMovement") return MouseMovement{point()};
  throw InvalidArgument("scenario: unknown event kind '" + kind + "'");
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario sc;
  try {
    sc.rules_id = j.value("rules", sc.rules_id);
    sc.num_players = j.value("players", sc.num_players);
    sc.seed = j.value("seed", sc.seed);
    sc.duration = j.value("duration", sc.duration);
    sc.ping_interval = j.value("ping_interval", sc.ping_interval);
    sc.smoothing_window = j.value("smoothing_window", sc.smoothing_window);
    sc.tick = j.value("tick", sc.tick);
    sc.render_on_tick = j.value("render_on_tick", sc.render_on_tick);
    sc.samples = j.value("samples", sc.samples);
    sc.start_offsets = j.value("start_offsets", sc.start_offsets);
    if (j.contains("net")) {
      const auto& n = j.at("net");
      const std::string kind = n.at("kind").get<std::string>();
      if (kind == "fixed") {
        sc.net = FixedLatency{n.at("latency").get<double>()};
      } else if (kind == "jitter") {
        sc.net = JitterLatency{n.at("min").get<double>(), n.at("max").get<double>(),
                               n.value("seed", std::uint64_t{0})};
      } else {
        throw InvalidArgument("scenario: unknown net kind '" + kind + "'");
      }
    }
    if (j.contains("generate")) {
      const auto& g = j.at("generate");
      det::DetRng rng(g.value("seed", std::uint64_t{0}));
      const double rate = g.at("rate").get<double>();
      sc.scripts.clear();
      for (std::size_t p = 0; p < sc.num_players; ++p) sc.scripts.push_back(random_script(rng, sc.duration, rate));
    } else {
      for (const auto& script : j.at("scripts")) {
        auto& out = sc.scripts.emplace_back();
        for (const auto& item : script) out.push_back({item.at("at").get<double>(), detail::scenario_event(item.at("event"))});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("scenario: ") + e.what());
  }
  validate(sc);
  return sc;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("'" + path + "': " + e.what());
  }
}

inline Scenario load_scenario(const std::string& path) { return scenario_from_json(read_json_file(path)); }

}  // namespace lockstep::sim

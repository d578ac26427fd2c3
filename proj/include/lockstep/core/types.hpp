#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>

namespace lockstep {

/// Seconds since game start.
using Timestamp = double;

/// Largest time slice ever handed to a game's `step` function.
inline constexpr double kGameRate = 1.0 / 16.0;

struct PlayerId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(PlayerId, PlayerId) = default;
  friend std::ostream& operator<<(std::ostream& os, PlayerId p) {
    return os << "player#" << p.value;
  }
};

enum class MouseButton : std::uint8_t { Left, Middle, Right };

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct KeyPress {
  std::string key;
  friend bool operator==(const KeyPress&, const KeyPress&) = default;
};

struct KeyRelease {
  std::string key;
  friend bool operator==(const KeyRelease&, const KeyRelease&) = default;
};

struct MousePress {
  MouseButton button = MouseButton::Left;
  Point at;
  friend bool operator==(const MousePress&, const MousePress&) = default;
};

struct MouseRelease {
  MouseButton button = MouseButton::Left;
  Point at;
  friend bool operator==(const MouseRelease&, const MouseRelease&) = default;
};

struct MouseMovement {
  Point at;
  friend bool operator==(const MouseMovement&, const MouseMovement&) = default;
};

using InputEvent =
    std::variant<KeyPress, KeyRelease, MousePress, MouseRelease, MouseMovement>;

/// The only thing clients ever exchange: who did what, and when.
struct Message {
  Timestamp t = 0.0;
  PlayerId player;
  InputEvent event;

  friend bool operator==(const Message&, const Message&) = default;
};

inline std::string_view event_kind(const InputEvent& e) {
  struct {
    std::string_view operator()(const KeyPress&) const { return "KeyPress"; }
    std::string_view operator()(const KeyRelease&) const { return "KeyRelease"; }
    std::string_view operator()(const MousePress&) const { return "MousePress"; }
    std::string_view operator()(const MouseRelease&) const { return "MouseRelease"; }
    std::string_view operator()(const MouseMovement&) const { return "MouseMovement"; }
  } visitor;
  return std::visit(visitor, e);
}

inline std::string_view button_name(MouseButton b) {
  switch (b) {
    case MouseButton::Left: return "Left";
    case MouseButton::Middle: return "Middle";
    case MouseButton::Right: return "Right";
  }
  return "?";
}

/// Key events need non-empty text, pointer events need finite coordinates.
inline bool is_valid(const InputEvent& e) {
  auto finite = [](const Point& p) { return std::isfinite(p.x) && std::isfinite(p.y); };
  struct {
    decltype(finite) ok;
    bool operator()(const KeyPress& k) const { return !k.key.empty(); }
    bool operator()(const KeyRelease& k) const { return !k.key.empty(); }
    bool operator()(const MousePress& m) const { return ok(m.at); }
    bool operator()(const MouseRelease& m) const { return ok(m.at); }
    bool operator()(const MouseMovement& m) const { return ok(m.at); }
  } visitor{finite};
  return std::visit(visitor, e);
}

inline std::ostream& operator<<(std::ostream& os, const Message& m) {
  return os << "(" << m.t << ", " << m.player.value << ", " << event_kind(m.event) << ")";
}

}  // namespace lockstep

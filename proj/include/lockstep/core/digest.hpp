#pragma once

#include <bit>
#include <cstdint>
#include <string_view>
#include <type_traits>
#include <variant>

#include "lockstep/core/types.hpp"

namespace lockstep {

/// Order-sensitive 64-bit fingerprint for comparing worlds across clients.
/// Not cryptographic.
class Digest {
 public:
  Digest& add(std::uint64_t v) {
    h_ = mix(h_ ^ mix(v + 0x9E3779B97F4A7C15ULL));
    return *this;
  }
  Digest& add(double v) { return add(std::bit_cast<std::uint64_t>(v)); }
  Digest& add(std::string_view s) {
    add(static_cast<std::uint64_t>(s.size()));
    for (unsigned char c : s) add(static_cast<std::uint64_t>(c));
    return *this;
  }

  Digest& add(PlayerId p) { return add(static_cast<std::uint64_t>(p.value)); }
  Digest& add(const Point& p) { return add(p.x).add(p.y); }
  Digest& add(const InputEvent& e) {
    add(static_cast<std::uint64_t>(e.index()));
    std::visit(
        [this](const auto& ev) {
          using T = std::decay_t<decltype(ev)>;
          if constexpr (std::is_same_v<T, KeyPress> || std::is_same_v<T, KeyRelease>) {
            add(std::string_view(ev.key));
          } else if constexpr (std::is_same_v<T, MouseMovement>) {
            add(ev.at);
          } else {
            add(static_cast<std::uint64_t>(ev.button)).add(ev.at);
          }
        },
        e);
    return *this;
  }

  std::uint64_t value() const { return h_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t h_ = 0x6A09E667F3BCC909ULL;
};

}  // namespace lockstep

#pragma once

// Random frame generator for round-trip tests.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "lockstep/det/det_rng.hpp"
#include "lockstep/proto/frame.hpp"

namespace frames {

using namespace lockstep;

/// Doubles that tend to break text round-trips, plus arbitrary bit patterns.
inline double tricky_double(det::DetRng& rng) {
  using L = std::numeric_limits<double>;
  switch (rng.below(10)) {
    case 0: return L::denorm_min();
    case 1: return -L::denorm_min() * static_cast<double>(1 + rng.below(1000));
    case 2: return -0.0;
    case 3: return L::max();
    case 4: return -L::max();
    case 5: return L::min();
    case 6: return L::epsilon();
    case 7: return rng.uniform(-1e6, 1e6);
    default: {
      // Any finite bit pattern.
      for (;;) {
        const double d = std::bit_cast<double>(rng.next());
        if (std::isfinite(d)) return d;
      }
    }
  }
}

inline std::uint64_t tricky_bits(det::DetRng& rng) {
  return rng.below(4) == 0 ? rng.next() : proto::timestamp_bits(tricky_double(rng));
}

inline std::string random_text(det::DetRng& rng, std::size_t min_len = 1) {
  static const std::string pool[] = {"a", "Z", "0", " ", "\"", "\\", "\n", "\t", "é", "日", "\U0001F600", "{}"};
  std::string s;
  const std::size_t n = min_len + rng.below(6);
  for (std::size_t i = 0; i < n; ++i) s += pool[rng.below(std::size(pool))];
  return s;
}

inline std::string random_code(det::DetRng& rng) {
  std::string c(4, 'A');
  for (char& ch : c) ch = static_cast<char>('A' + rng.below(26));
  return c;
}

inline InputEvent random_event(det::DetRng& rng) {
  auto button = [&] { return static_cast<MouseButton>(rng.below(3)); };
  auto point = [&] { return Point{tricky_double(rng), tricky_double(rng)}; };
  switch (rng.below(5)) {
    case 0: return KeyPress{random_text(rng)};
    case 1: return KeyRelease{random_text(rng)};
    case 2: return MousePress{button(), point()};
    case 3: return MouseRelease{button(), point()};
    default: return MouseMovement{point()};
  }
}

inline proto::Frame random_frame(det::DetRng& rng) {
  auto player = [&] { return PlayerId{static_cast<std::uint32_t>(rng.below(1u << 20))}; };
  auto count = [&] { return static_cast<std::uint8_t>(1 + rng.below(255)); };
  auto seat = [&](std::uint8_t n) { return PlayerId{static_cast<std::uint32_t>(rng.below(n))}; };
  switch (rng.below(11)) {
    case 0: {
      std::string hash(64, '0');
      for (char& c : hash) c = "0123456789abcdef"[rng.below(16)];
      return proto::ClientHello{static_cast<std::uint32_t>(rng.next()), hash};
    }
    case 1: return proto::CreateGame{count()};
    case 2: return proto::GameCreated{random_code(rng)};
    case 3: return proto::JoinGame{random_code(rng)};
    case 4: {
      const std::uint8_t total = count();
      return proto::Joined{seat(total), static_cast<std::uint8_t>(rng.below(total + 1u)), total};
    }
    case 5: {
      const std::uint8_t n = count();
      return proto::GameStarted{seat(n), n, rng.next()};
    }
    case 6: return proto::Input{tricky_bits(rng), random_event(rng)};
    case 7: return proto::Ping{tricky_bits(rng)};
    case 8: return proto::Relayed{tricky_bits(rng), player(), random_event(rng)};
    case 9: return proto::RelayedPing{tricky_bits(rng), player()};
    default: return proto::ErrorFrame{static_cast<proto::ErrorCode>(rng.below(5)), random_text(rng, 0)};
  }
}

}  // namespace frames

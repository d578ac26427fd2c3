#pragma once

// Feeds per-player activity lists to a Log in every order that respects each
// player's own order, and checks that all resulting Logs are the same.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lockstep/core/log.hpp"
#include "lockstep/det/det_rng.hpp"
#include "lockstep/error.hpp"

namespace lockstep::sim {

/// One step of a player's history: an input event, or a ping when `event` is empty.
struct Activity {
  Timestamp t = 0.0;
  std::optional<InputEvent> event;
};

using ActivityLists = std::vector<std::vector<Activity>>;

struct InterleavingResult {
  bool ok = true;
  std::uint64_t checked = 0;
  // First failing merge, as the player index taken at each step.
  std::vector<std::size_t> counterexample;
  std::string reason;
};

inline constexpr std::uint64_t kDefaultInterleavingCap = 100000;

/// Multinomial (n1+...+nk)! / (n1!...nk!), saturating at UINT64_MAX.
inline std::uint64_t interleaving_count(const ActivityLists& lists) {
  std::uint64_t result = 1;
  std::uint64_t total = 0;
  for (const auto& l : lists) {
    for (std::uint64_t k = 1; k <= l.size(); ++k) {
      ++total;
      // result * total / k is an integer; after cancelling gcd(total, k) the
      // remaining divisor must divide result.
      const std::uint64_t g = std::gcd(total, k);
      const std::uint64_t num = total / g;
      const std::uint64_t div = result / (k / g);
      if (div > UINT64_MAX / num) return UINT64_MAX;
      result = div * num;
    }
  }
  return result;
}

/// nullopt if equal; otherwise what differs. Worlds are compared by digest.
template <DigestRules R>
std::optional<std::string> log_difference(const R& rules, const Log<WorldOf<R>>& a, const Log<WorldOf<R>>& b) {
  if (std::bit_cast<std::uint64_t>(a.committed.t) != std::bit_cast<std::uint64_t>(b.committed.t)) {
    return "committed time differs";
  }
  if (rules.digest(a.committed.world) != rules.digest(b.committed.world)) return "committed world differs";
  if (a.events != b.events) return "pending events differ";
  if (a.latest.size() != b.latest.size()) return "latest map differs";
  for (std::size_t i = 0; i < a.latest.size(); ++i) {
    if (a.latest[i].first != b.latest[i].first ||
        std::bit_cast<std::uint64_t>(a.latest[i].second) != std::bit_cast<std::uint64_t>(b.latest[i].second)) {
      return "latest map differs";
    }
  }
  return std::nullopt;
}

namespace detail {

inline void check_monotone(const ActivityLists& lists) {
  for (std::size_t p = 0; p < lists.size(); ++p) {
    for (std::size_t i = 1; i < lists[p].size(); ++i) {
      if (!(lists[p][i - 1].t <= lists[p][i].t)) {
        throw InvalidArgument("player " + std::to_string(p) + ": activity times must be non-decreasing");
      }
    }
  }
}

template <GameRules R>
Log<WorldOf<R>> apply_activity(const R& rules, std::size_t p, const Activity& a, Log<WorldOf<R>> log) {
  const PlayerId id{static_cast<std::uint32_t>(p)};
  if (a.event) return add_event(rules, Message{a.t, id, *a.event}, std::move(log));
  return add_ping(rules, a.t, id, std::move(log));
}

template <DigestRules R>
class Enumerator {
 public:
  Enumerator(const R& rules, const ActivityLists& lists) : rules_(rules), lists_(lists), next_(lists.size(), 0) {}

  InterleavingResult run(Log<WorldOf<R>> start) {
    recurse(std::move(start));
    return std::move(result_);
  }

 private:
  void recurse(const Log<WorldOf<R>>& log) {
    if (!result_.ok) return;
    bool leaf = true;
    for (std::size_t p = 0; p < lists_.size(); ++p) {
      if (next_[p] == lists_[p].size()) continue;
      leaf = false;
      path_.push_back(p);
      const Activity& a = lists_[p][next_[p]++];
      recurse(apply_activity(rules_, p, a, log));
      --next_[p];
      path_.pop_back();
      if (!result_.ok) return;
    }
    if (!leaf) return;
    ++result_.checked;
    if (!reference_) {
      reference_ = log;
    } else if (auto diff = log_difference(rules_, *reference_, log)) {
      result_.ok = false;
      result_.reason = *diff;
      result_.counterexample = path_;
    }
  }

  const R& rules_;
  const ActivityLists& lists_;
  std::vector<std::size_t> next_;
  std::vector<std::size_t> path_;
  std::optional<Log<WorldOf<R>>> reference_;
  InterleavingResult result_;
};

template <GameRules R>
Log<WorldOf<R>> replay_merge(const R& rules, const ActivityLists& lists, const std::vector<std::size_t>& order,
                             Log<WorldOf<R>> log) {
  std::vector<std::size_t> next(lists.size(), 0);
  for (std::size_t p : order) log = apply_activity(rules, p, lists[p][next[p]++], std::move(log));
  return log;
}

}  // namespace detail

/// Player order of a merge, one entry per activity.
inline std::vector<std::size_t> player_tokens(const ActivityLists& lists) {
  std::vector<std::size_t> tokens;
  for (std::size_t p = 0; p < lists.size(); ++p) tokens.insert(tokens.end(), lists[p].size(), p);
  return tokens;
}

/// Exhaustive check. Refuses (InvalidArgument) when there are more than
/// `cap` interleavings.
template <DigestRules R>
InterleavingResult check_all_interleavings(const R& rules, const ActivityLists& lists, std::uint64_t seed = 0,
                                           std::uint64_t cap = kDefaultInterleavingCap) {
  if (lists.size() != rules.num_players()) throw InvalidArgument("need one activity list per player");
  detail::check_monotone(lists);
  const std::uint64_t n = interleaving_count(lists);
  if (n > cap) {
    throw InvalidArgument(std::to_string(n) + " interleavings exceed the cap of " + std::to_string(cap));
  }
  return detail::Enumerator<R>(rules, lists).run(init_log(rules, seed));
}

/// `trials` uniformly random merges, each compared with the merge that takes
/// players in list order.
template <DigestRules R>
InterleavingResult check_random_interleavings(const R& rules, const ActivityLists& lists, std::size_t trials,
                                              std::uint64_t rng_seed, std::uint64_t seed = 0) {
  if (lists.size() != rules.num_players()) throw InvalidArgument("need one activity list per player");
  detail::check_monotone(lists);
  const auto start = init_log(rules, seed);
  std::vector<std::size_t> order = player_tokens(lists);
  const auto reference = detail::replay_merge(rules, lists, order, start);
  det::DetRng rng(rng_seed);
  InterleavingResult result;
  for (std::size_t i = 0; i < trials; ++i) {
    // Fisher-Yates with our own bounded draw, so the sequence is the same on every standard library.
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
    const auto log = detail::replay_merge(rules, lists, order, start);
    ++result.checked;
    if (auto diff = log_difference(rules, reference, log)) {
      result.ok = false;
      result.reason = *diff;
      result.counterexample = order;
      break;
    }
  }
  return result;
}

inline std::string describe(const InterleavingResult& r) {
  std::ostringstream os;
  os << (r.ok ? "PASS" : "FAIL") << " checked=" << r.checked;
  if (!r.ok) {
    os << " reason=\"" << r.reason << "\" order=";
    for (std::size_t i = 0; i < r.counterexample.size(); ++i) os << (i ? "," : "") << r.counterexample[i];
  }
  return os.str();
}

}  // namespace lockstep::sim

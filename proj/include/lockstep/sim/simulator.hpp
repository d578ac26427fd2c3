#pragma once

// Single-threaded, virtual-time simulation of N clients talking through a
// relay. Frames really are encoded and decoded; only the sockets are fake.
//
// Virtual time `vt` is global. Client i starts its game clock at
// vt = offset(i), so its game time is vt - offset(i). Links are reliable and
// FIFO: jittered delays are clamped so deliveries on one link never cross.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <memory>
#include <queue>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "lockstep/core/log.hpp"
#include "lockstep/core/smoothing.hpp"
#include "lockstep/det/det_rng.hpp"
#include "lockstep/proto/codec.hpp"
#include "lockstep/session/session.hpp"
#include "lockstep/sim/rules.hpp"
#include "lockstep/sim/scenario.hpp"

namespace lockstep::sim {

/// Per directed link delay with FIFO delivery.
class Links {
 public:
  Links(const NetModel& model, std::size_t n) : model_(model), n_(n), last_(n * n, 0.0) {
    if (const auto* j = std::get_if<JitterLatency>(&model_)) {
      for (std::size_t i = 0; i < n * n; ++i) {
        rngs_.emplace_back(det::DetRng(j->seed ^ (0xA24BAED4963EE407ULL * (i + 1))));
      }
    }
  }

  double deliver_at(std::size_t from, std::size_t to, double sent) {
    const std::size_t link = from * n_ + to;
    double delay = 0.0;
    if (const auto* f = std::get_if<FixedLatency>(&model_)) {
      delay = f->seconds;
    } else {
      const auto& j = std::get<JitterLatency>(model_);
      delay = rngs_[link].uniform(j.min, j.max);
    }
    last_[link] = std::max(last_[link], sent + delay);
    return last_[link];
  }

 private:
  NetModel model_;
  std::size_t n_;
  std::vector<double> last_;
  std::vector<det::DetRng> rngs_;
};

/// Clock that reads the simulator's virtual time.
class VirtualClock {
 public:
  explicit VirtualClock(const double* vt = nullptr) : vt_(vt) {}
  void start() { epoch_ = *vt_; }
  Timestamp now() const { return *vt_ - epoch_; }

 private:
  const double* vt_;
  double epoch_ = 0.0;
};

struct ClientReport {
  std::vector<std::uint64_t> sample_digests;
  std::uint64_t final_digest = 0;
  std::uint64_t final_smoothed_digest = 0;
  std::size_t max_pending = 0;         // pending events of any player
  std::size_t max_remote_pending = 0;  // pending events of other players
  std::size_t late_events = 0;         // remote events that arrived after their timestamp
  std::size_t events_sent = 0;
  std::size_t pings_sent = 0;
  std::uint64_t step_calls = 0;
  std::uint64_t handle_calls = 0;
};

struct Report {
  std::vector<Timestamp> sample_times;
  Timestamp final_time = 0.0;
  std::vector<ClientReport> clients;

  /// All clients agree after quiescence.
  bool consistent() const {
    return std::all_of(clients.begin(), clients.end(),
                       [&](const ClientReport& c) { return c.final_digest == clients.front().final_digest; });
  }
  /// Rendering has caught up with the authoritative state everywhere.
  bool smoothing_converged() const {
    return std::all_of(clients.begin(), clients.end(),
                       [](const ClientReport& c) { return c.final_digest == c.final_smoothed_digest; });
  }

  std::string to_text() const {
    std::ostringstream os;
    auto hex = [](std::uint64_t v) {
      std::ostringstream h;
      h << std::hex << std::setw(16) << std::setfill('0') << v;
      return h.str();
    };
    os << std::setprecision(17);
    for (std::size_t s = 0; s < sample_times.size(); ++s) {
      for (std::size_t c = 0; c < clients.size(); ++c) {
        os << "sample t=" << sample_times[s] << " client=" << c << " digest=" << hex(clients[c].sample_digests[s])
           << "\n";
      }
    }
    for (std::size_t c = 0; c < clients.size(); ++c) {
      const ClientReport& r = clients[c];
      os << "final client=" << c << " t=" << final_time << " digest=" << hex(r.final_digest)
         << " smoothed=" << hex(r.final_smoothed_digest) << "\n";
      os << "stats client=" << c << " events_sent=" << r.events_sent << " pings_sent=" << r.pings_sent
         << " max_pending=" << r.max_pending << " max_remote_pending=" << r.max_remote_pending
         << " late_events=" << r.late_events << " step_calls=" << r.step_calls
         << " handle_calls=" << r.handle_calls << "\n";
    }
    os << "consistent " << (consistent() ? "yes" : "no") << "\n";
    os << "smoothing_converged " << (smoothing_converged() ? "yes" : "no") << "\n";
    return os.str();
  }
};

/// A session fault inside the simulator, tagged with the client it hit.
class ClientFault : public Error {
 public:
  ClientFault(std::size_t client, const session::SessionError& e)
      : Error("client " + std::to_string(client) + ": " + e.what()), client_(client), code_(e.code()) {}
  std::size_t client() const { return client_; }
  session::SessionErrorCode code() const { return code_; }

 private:
  std::size_t client_;
  session::SessionErrorCode code_;
};

namespace detail {

template <DigestRules R>
class Simulation {
 public:
  using Rules = Counted<R>;
  using Sess = session::Session<Rules, VirtualClock>;

  Simulation(const Scenario& sc, const R& rules) : sc_(sc), links_(sc.net, sc.num_players) {
    session::SessionOptions opts;
    opts.ping_interval = sc.ping_interval;
    opts.smoothing_window = sc.smoothing_window;
    for (std::size_t i = 0; i < sc.num_players; ++i) {
      Rules counted{rules, std::make_shared<CallCounts>()};
      counts_.push_back(counted.counts);
      clients_.emplace_back(std::make_unique<Sess>(counted, VirtualClock(&vt_), opts));
    }
    report_.clients.resize(sc.num_players);
    report_.sample_times = sc.samples;
    for (auto& c : report_.clients) c.sample_digests.resize(sc.samples.size());
  }

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  Report run() {
    const double max_offset = sc_.max_offset();
    for (std::size_t i = 0; i < clients_.size(); ++i) {
      push(sc_.offset(i), kStart, Start{i});
      for (std::size_t k = 0; k < sc_.scripts[i].size(); ++k) {
        push(sc_.scripts[i][k].at + sc_.offset(i), kScript, Script{i, k});
      }
      push(sc_.offset(i) + sc_.tick, kTick, Tick{i, 1});
    }
    double last_sample = 0.0;
    for (std::size_t s = 0; s < sc_.samples.size(); ++s) {
      push(sc_.samples[s] + max_offset, kSample, Sample{s});
      last_sample = std::max(last_sample, sc_.samples[s] + max_offset);
    }

    run_until(sc_.duration + max_offset);
    // Every event is now in flight; wait for the last one plus a full smoothing window.
    const double end = std::max({max_event_delivery_, sc_.duration + max_offset}) + sc_.smoothing_window + max_offset;
    run_until(std::max(end, last_sample));

    const Timestamp final_time = vt_ - max_offset;
    report_.final_time = final_time;
    for (std::size_t i = 0; i < clients_.size(); ++i) {
      const Sess& s = *clients_[i];
      ClientReport& r = report_.clients[i];
      r.final_digest = s.rules().digest(current_state(s.rules(), final_time, s.log()));
      r.final_smoothed_digest = s.rules().digest(smoothed_state(s.rules(), final_time, s.log(), s.smoothing()));
      r.step_calls = counts_[i]->step;
      r.handle_calls = counts_[i]->handle;
    }
    return report_;
  }

 private:
  enum Priority { kStart = 0, kScript = 1, kDelivery = 2, kTick = 3, kSample = 4 };
  struct Start { std::size_t client; };
  struct Script { std::size_t client; std::size_t index; };
  struct Delivery { std::size_t client; proto::Bytes bytes; };
  struct Tick { std::size_t client; std::uint64_t n; };
  struct Sample { std::size_t index; };
  using Action = std::variant<Start, Script, Delivery, Tick, Sample>;

  struct Item {
    double vt;
    int priority;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Item& a, const Item& b) const {
      if (a.vt != b.vt) return a.vt > b.vt;
      if (a.priority != b.priority) return a.priority > b.priority;
      return a.seq > b.seq;
    }
  };

  static std::size_t client_of(const Action& a) {
    return std::visit(
        [](const auto& x) -> std::size_t {
          if constexpr (requires { x.client; }) return x.client;
          else return 0;
        },
        a);
  }

  void push(double vt, Priority p, Action a) { queue_.push(Item{vt, p, seq_++, std::move(a)}); }

  void run_until(double limit) {
    while (!queue_.empty() && queue_.top().vt <= limit) {
      Item item = queue_.top();
      queue_.pop();
      vt_ = std::max(vt_, item.vt);
      try {
        std::visit([this](auto& a) { on(a); }, item.action);
      } catch (const session::SessionError& e) {
        throw ClientFault(client_of(item.action), e);
      }
    }
    vt_ = std::max(vt_, limit);
  }

  void on(const Start& a) {
    Sess& s = *clients_[a.client];
    s.on_frame(proto::GameStarted{PlayerId{static_cast<std::uint32_t>(a.client)},
                                  static_cast<std::uint8_t>(sc_.num_players), sc_.seed});
  }

  void on(const Script& a) {
    Sess& s = *clients_[a.client];
    if (auto f = s.submit_local(sc_.scripts[a.client][a.index].event)) {
      ++report_.clients[a.client].events_sent;
      send(a.client, *f);
    }
    observe(a.client);
  }

  void on(const Delivery& a) {
    Sess& s = *clients_[a.client];
    const proto::Frame f = proto::decode_frame(a.bytes);
    if (const auto* r = std::get_if<proto::Relayed>(&f)) {
      if (proto::timestamp_from_bits(r->t_bits) < s.now()) ++report_.clients[a.client].late_events;
    }
    s.on_frame(f);
    observe(a.client);
  }

  void on(const Tick& a) {
    Sess& s = *clients_[a.client];
    if (auto f = s.tick()) {
      if (std::holds_alternative<proto::Ping>(*f)) ++report_.clients[a.client].pings_sent;
      else ++report_.clients[a.client].events_sent;
      send(a.client, *f);
    }
    if (sc_.render_on_tick) (void)s.smoothed();
    observe(a.client);
    push(sc_.offset(a.client) + static_cast<double>(a.n + 1) * sc_.tick, kTick, Tick{a.client, a.n + 1});
  }

  void on(const Sample& a) {
    const Timestamp t = sc_.samples[a.index];
    for (std::size_t i = 0; i < clients_.size(); ++i) {
      const Sess& s = *clients_[i];
      report_.clients[i].sample_digests[a.index] = s.rules().digest(current_state(s.rules(), t, s.log()));
    }
  }

  // What the relay would forward to everyone else.
  void send(std::size_t from, const proto::Frame& f) {
    const PlayerId sender{static_cast<std::uint32_t>(from)};
    proto::Frame relayed;
    bool is_event = false;
    if (const auto* in = std::get_if<proto::Input>(&f)) {
      relayed = proto::Relayed{in->t_bits, sender, in->event};
      is_event = true;
    } else {
      relayed = proto::RelayedPing{std::get<proto::Ping>(f).t_bits, sender};
    }
    const proto::Bytes bytes = proto::encode_frame(relayed);
    for (std::size_t to = 0; to < clients_.size(); ++to) {
      if (to == from) continue;
      const double at = std::max(links_.deliver_at(from, to, vt_), sc_.offset(to));
      if (is_event) max_event_delivery_ = std::max(max_event_delivery_, at);
      push(at, kDelivery, Delivery{to, bytes});
    }
  }

  void observe(std::size_t i) {
    const Sess& s = *clients_[i];
    if (!s.started()) return;
    ClientReport& r = report_.clients[i];
    const auto& events = s.log().events;
    r.max_pending = std::max(r.max_pending, events.size());
    const auto remote = static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [&](const Message& m) { return m.player != s.player(); }));
    r.max_remote_pending = std::max(r.max_remote_pending, remote);
  }

  const Scenario& sc_;
  Links links_;
  double vt_ = 0.0;
  double max_event_delivery_ = 0.0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Item, std::vector<Item>, Later> queue_;
  std::vector<std::unique_ptr<Sess>> clients_;
  std::vector<std::shared_ptr<CallCounts>> counts_;
  Report report_;
};

}  // namespace detail

/// Runs `sc` to quiescence with `rules` on every client.
template <DigestRules R>
Report run_scenario(const Scenario& sc, const R& rules) {
  validate(sc);
  if (rules.num_players() != sc.num_players) {
    throw InvalidArgument("scenario has " + std::to_string(sc.num_players) + " players, rules expect " +
                          std::to_string(rules.num_players()));
  }
  detail::Simulation<R> sim(sc, rules);
  return sim.run();
}

}  // namespace lockstep::sim

// lockstep-sim: runs harness scenarios and interleaving checks from files.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lockstep/det/det_math.hpp"
#include "lockstep/det/det_rng.hpp"
#include "lockstep/sim/interleavings.hpp"
#include "lockstep/sim/pendulum.hpp"
#include "lockstep/sim/rules_registry.hpp"
#include "lockstep/sim/scenario.hpp"
#include "lockstep/sim/simulator.hpp"

namespace {

using namespace lockstep;
using nlohmann::json;

int run_command(const std::string& path) {
  const sim::Scenario sc = sim::load_scenario(path);
  const sim::Report report =
      sim::with_rules(sc.rules_id, sc.num_players, [&](const auto& rules) { return sim::run_scenario(sc, rules); });
  std::cout << report.to_text();
  return report.consistent() && report.smoothing_converged() ? 0 : 1;
}

// Case file:
// {"rules": "counter", "players": 2, "seed": 0,
//  "mode": "all" | "random", "trials": 1000, "rng_seed": 1, "cap": 100000,
//  "lists": [[{"t": 0.5, "event": {...}}, {"t": 1.0}], ...]}
// An entry without "event" is a ping.
int interleave_command(const std::string& path) {
  const json j = sim::read_json_file(path);
  sim::ActivityLists lists;
  try {
    for (const auto& list : j.at("lists")) {
      auto& out = lists.emplace_back();
      for (const auto& item : list) {
        sim::Activity a{item.at("t").get<double>(), std::nullopt};
        if (item.contains("event")) a.event = sim::detail::scenario_event(item.at("event"));
        out.push_back(std::move(a));
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("case file: ") + e.what());
  }
  const std::string rules_id = j.value("rules", "counter");
  const std::size_t players = j.value("players", lists.size());
  const std::uint64_t seed = j.value("seed", std::uint64_t{0});
  const std::string mode = j.value("mode", "all");

  const sim::InterleavingResult result = sim::with_rules(rules_id, players, [&](const auto& rules) {
    if (mode == "random") {
      return sim::check_random_interleavings(rules, lists, j.value("trials", std::size_t{1000}),
                                             j.value("rng_seed", std::uint64_t{1}), seed);
    }
    if (mode != "all") throw InvalidArgument("mode must be 'all' or 'random'");
    return sim::check_all_interleavings(rules, lists, seed, j.value("cap", sim::kDefaultInterleavingCap));
  });
  std::cout << sim::describe(result) << "\n";
  return result.ok ? 0 : 1;
}

// Reference outputs for cross-build comparison, one "input output" pair of
// hex bit patterns per line.
int golden_command(const std::string& fn, std::size_t count, std::uint64_t seed) {
  double lo = 0.0;
  double hi = 0.0;
  double (*f)(double) = nullptr;
  if (fn == "sin") {
    f = det::det_sin, lo = -10.0, hi = 10.0;
  } else if (fn == "cos") {
    f = det::det_cos, lo = -10.0, hi = 10.0;
  } else if (fn == "exp") {
    f = det::det_exp, lo = -700.0, hi = 700.0;
  } else if (fn == "ln") {
    f = det::det_ln, lo = 1e-300, hi = 1e300;
  } else {
    throw InvalidArgument("golden: unknown function '" + fn + "'");
  }
  det::DetRng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    double x = rng.uniform(lo, hi);
    // Spread ln inputs over the exponent range instead of the linear range.
    if (fn == "ln") x = det::det_exp(rng.uniform(-690.0, 690.0));
    std::printf("%016llx %016llx\n", static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(x)),
                static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(f(x))));
  }
  return 0;
}

int pendulum_command(std::uint64_t steps, bool native) {
  const auto [a, b] = sim::double_pendulum_scenario(steps, !native);
  std::printf("engine=0 digest=%016llx\nengine=1 digest=%016llx\nequal %s\n", static_cast<unsigned long long>(a),
              static_cast<unsigned long long>(b), a == b ? "yes" : "no");
  // Native math is allowed to diverge; only report it.
  return native || a == b ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lock-step engine simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  auto* run = app.add_subcommand("run", "Run a scenario file and print the report");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  std::string case_path;
  auto* interleave = app.add_subcommand("interleave", "Check every interleaving of a case file");
  interleave->add_option("case", case_path, "Case JSON file")->required();

  std::string fn;
  std::size_t count = 256;
  std::uint64_t seed = 1;
  auto* golden = app.add_subcommand("golden", "Print input/output bit patterns of a det math function");
  golden->add_option("function", fn, "sin, cos, exp or ln")->required();
  golden->add_option("--count", count, "Number of samples");
  golden->add_option("--seed", seed, "Sampling seed");

  std::uint64_t steps = 100000;
  bool native = false;
  auto* pendulum = app.add_subcommand("pendulum", "Run the double-pendulum twin comparison");
  pendulum->add_option("--steps", steps, "Game-rate steps");
  pendulum->add_flag("--native", native, "Use the platform sin/cos");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(scenario_path);
    if (*interleave) return interleave_command(case_path);
    if (*golden) return golden_command(fn, count, seed);
    if (*pendulum) return pendulum_command(steps, native);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

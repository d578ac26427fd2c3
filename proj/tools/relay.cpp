// relay: lobby and broadcast server for lock-step games.

#include <csignal>
#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "lockstep/relay/tcp_server.hpp"

namespace {

lockstep::relay::RelayServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relay server for lock-step games"};
  std::string listen = "127.0.0.1:7777";
  std::size_t max_rooms = 4096;
  std::size_t frame_cap = lockstep::proto::kMaxFrameBytes;
  std::string log_level = "info";
  app.add_option("--listen", listen, "Address to bind, host:port");
  app.add_option("--max-rooms", max_rooms, "Maximum number of open rooms")->check(CLI::PositiveNumber);
  app.add_option("--frame-cap", frame_cap, "Largest accepted frame payload in bytes")
      ->check(CLI::Range(std::size_t{64}, lockstep::proto::kMaxFrameBytes));
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));
  CLI11_PARSE(app, argc, argv);

  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    lockstep::relay::ServerOptions options;
    options.listen = lockstep::net::parse_host_port(listen);
    options.frame_cap = frame_cap;
    options.rooms.max_rooms = max_rooms;
    lockstep::relay::RelayServer server(options);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.run();
    g_server = nullptr;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}

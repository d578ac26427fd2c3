#include <gtest/gtest.h>

#include <condition_variable>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "lockstep/relay/room_table.hpp"
#include "lockstep/session/session.hpp"
#include "lockstep/sim/rules.hpp"
#include "loopback.hpp"

namespace {

using namespace lockstep;
using namespace lockstep::relay;

const std::string kHashA(64, 'a');
const std::string kHashB(64, 'b');

template <class F>
std::vector<F> frames_to(const std::vector<Outgoing>& out, ConnectionId to) {
  std::vector<F> found;
  for (const Outgoing& o : out) {
    if (o.to != to) continue;
    if (const auto* f = std::get_if<F>(&o.frame)) found.push_back(*f);
  }
  return found;
}

std::optional<proto::ErrorCode> error_to(const std::vector<Outgoing>& out, ConnectionId to) {
  const auto errors = frames_to<proto::ErrorFrame>(out, to);
  if (errors.empty()) return std::nullopt;
  return errors.front().code;
}

class RoomTableTest : public ::testing::Test {
 protected:
  RoomTable table{{}, [] { return std::uint64_t{1234}; }, 99};

  void hello(ConnectionId c, const std::string& hash = kHashA) {
    EXPECT_TRUE(table.handle_frame(c, proto::ClientHello{proto::kProtocolVersion, hash}).empty());
  }
  std::string create(ConnectionId c, std::uint8_t n) {
    const auto out = table.handle_frame(c, proto::CreateGame{n});
    const auto created = frames_to<proto::GameCreated>(out, c);
    EXPECT_EQ(created.size(), 1u);
    return created.empty() ? "" : created.front().code;
  }
  // Two clients in a running game: connection 1 is seat 0, connection 2 seat 1.
  std::string running_pair() {
    hello(1);
    hello(2);
    const std::string code = create(1, 2);
    table.handle_frame(2, proto::JoinGame{code});
    return code;
  }
};

TEST_F(RoomTableTest, CreateGivesFourLetterCodeAndSeatZero) {
  hello(1);
  const auto out = table.handle_frame(1, proto::CreateGame{2});
  const auto created = frames_to<proto::GameCreated>(out, 1);
  ASSERT_EQ(created.size(), 1u);
  EXPECT_TRUE(proto::is_room_code(created[0].code));
  const auto joined = frames_to<proto::Joined>(out, 1);
  ASSERT_EQ(joined.size(), 1u);
  EXPECT_EQ(joined[0], (proto::Joined{PlayerId{0}, 1, 2}));
  EXPECT_EQ(table.room_state(created[0].code), RoomState::Lobby);
}

TEST_F(RoomTableTest, TwoMatchingJoinsStartWithOneSeed) {
  hello(1);
  hello(2);
  const std::string code = create(1, 2);
  const auto out = table.handle_frame(2, proto::JoinGame{code});
  EXPECT_EQ(frames_to<proto::Joined>(out, 1), (std::vector<proto::Joined>{{PlayerId{0}, 2, 2}}));
  EXPECT_EQ(frames_to<proto::Joined>(out, 2), (std::vector<proto::Joined>{{PlayerId{1}, 2, 2}}));
  EXPECT_EQ(frames_to<proto::GameStarted>(out, 1), (std::vector<proto::GameStarted>{{PlayerId{0}, 2, 1234}}));
  EXPECT_EQ(frames_to<proto::GameStarted>(out, 2), (std::vector<proto::GameStarted>{{PlayerId{1}, 2, 1234}}));
  EXPECT_EQ(table.room_state(code), RoomState::Running);
}

TEST_F(RoomTableTest, SinglePlayerRoomStartsImmediately) {
  hello(1);
  const auto out = table.handle_frame(1, proto::CreateGame{1});
  EXPECT_EQ(frames_to<proto::GameStarted>(out, 1).size(), 1u);
}

TEST_F(RoomTableTest, MismatchedHashesRejectEveryone) {
  hello(1, kHashA);
  hello(2, kHashB);
  const std::string code = create(1, 2);
  const auto out = table.handle_frame(2, proto::JoinGame{code});
  EXPECT_EQ(error_to(out, 1), proto::ErrorCode::HashMismatch);
  EXPECT_EQ(error_to(out, 2), proto::ErrorCode::HashMismatch);
  EXPECT_TRUE(frames_to<proto::GameStarted>(out, 1).empty());
  EXPECT_FALSE(table.room_state(code).has_value());
}

TEST_F(RoomTableTest, JoinErrors) {
  hello(1);
  hello(2);
  hello(3);
  EXPECT_EQ(error_to(table.handle_frame(2, proto::JoinGame{"ZZZZ"}), 2), proto::ErrorCode::BadCode);
  const std::string code = create(1, 2);
  table.handle_frame(2, proto::JoinGame{code});
  EXPECT_EQ(error_to(table.handle_frame(3, proto::JoinGame{code}), 3), proto::ErrorCode::GameFull);
}

TEST_F(RoomTableTest, HelloIsRequiredAndChecked) {
  EXPECT_EQ(error_to(table.handle_frame(1, proto::CreateGame{2}), 1), proto::ErrorCode::ProtocolError);
  EXPECT_EQ(error_to(table.handle_frame(2, proto::ClientHello{99, kHashA}), 2), proto::ErrorCode::ProtocolError);
  hello(3);
  EXPECT_EQ(error_to(table.handle_frame(3, proto::ClientHello{proto::kProtocolVersion, kHashA}), 3),
            proto::ErrorCode::ProtocolError);
}

TEST_F(RoomTableTest, InputBeforeStartIsRejected) {
  hello(1);
  create(1, 2);
  EXPECT_EQ(error_to(table.handle_frame(1, proto::Input{0, KeyPress{"k"}}), 1), proto::ErrorCode::ProtocolError);
  EXPECT_EQ(error_to(table.handle_frame(1, proto::Ping{0}), 1), proto::ErrorCode::ProtocolError);
}

TEST_F(RoomTableTest, ServerFramesFromClientsAreRejected) {
  running_pair();
  EXPECT_EQ(error_to(table.handle_frame(1, proto::GameCreated{"ABCD"}), 1), proto::ErrorCode::ProtocolError);
  EXPECT_EQ(error_to(table.handle_frame(1, proto::Relayed{0, PlayerId{1}, KeyPress{"k"}}), 1),
            proto::ErrorCode::ProtocolError);
}

TEST_F(RoomTableTest, InputIsRelayedToOthersOnly) {
  running_pair();
  const auto out = table.handle_frame(2, proto::Input{42, KeyPress{"k"}});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].to, 1u);
  EXPECT_EQ(std::get<proto::Relayed>(out[0].frame), (proto::Relayed{42, PlayerId{1}, KeyPress{"k"}}));
  const auto pings = table.handle_frame(1, proto::Ping{7});
  ASSERT_EQ(pings.size(), 1u);
  EXPECT_EQ(pings[0].to, 2u);
  EXPECT_EQ(std::get<proto::RelayedPing>(pings[0].frame), (proto::RelayedPing{7, PlayerId{0}}));
}

TEST_F(RoomTableTest, DisconnectInLobbyKeepsRoomOpen) {
  hello(1);
  hello(2);
  const std::string code = create(1, 3);
  table.handle_frame(2, proto::JoinGame{code});
  const auto out = table.on_disconnect(2);
  EXPECT_EQ(frames_to<proto::Joined>(out, 1), (std::vector<proto::Joined>{{PlayerId{0}, 1, 3}}));
  EXPECT_EQ(table.room_state(code), RoomState::Lobby);
  table.on_disconnect(1);
  EXPECT_EQ(table.room_count(), 0u);
}

TEST_F(RoomTableTest, DisconnectWhileRunningClosesRoom) {
  const std::string code = running_pair();
  const auto out = table.on_disconnect(1);
  EXPECT_EQ(error_to(out, 2), proto::ErrorCode::ProtocolError);
  EXPECT_EQ(frames_to<proto::ErrorFrame>(out, 2)[0].detail, "player left");
  EXPECT_FALSE(table.room_state(code).has_value());
  EXPECT_TRUE(table.on_disconnect(77).empty());
}

TEST(RoomLimits, MaxRoomsIsEnforced) {
  RoomTable table({.max_rooms = 2}, [] { return std::uint64_t{0}; }, 1);
  for (ConnectionId c = 1; c <= 3; ++c) table.handle_frame(c, proto::ClientHello{proto::kProtocolVersion, kHashA});
  table.handle_frame(1, proto::CreateGame{2});
  table.handle_frame(2, proto::CreateGame{2});
  EXPECT_EQ(error_to(table.handle_frame(3, proto::CreateGame{2}), 3), proto::ErrorCode::ProtocolError);
}

TEST(GenerateCode, AvoidsOccupiedCodes) {
  det::DetRng rng(1);
  std::set<std::string> occupied;
  for (int i = 0; i < 5000; ++i) {
    const std::string code = generate_code(occupied, rng);
    ASSERT_TRUE(proto::is_room_code(code));
    ASSERT_FALSE(occupied.contains(code));
    occupied.insert(code);
  }
}

TEST(GenerateCode, DenseTableAndExhaustion) {
  std::set<std::string> occupied;
  for (char a = 'A'; a <= 'Z'; ++a)
    for (char b = 'A'; b <= 'Z'; ++b)
      for (char c = 'A'; c <= 'Z'; ++c)
        for (char d = 'A'; d <= 'Z'; ++d) occupied.insert(std::string{a, b, c, d});
  occupied.erase("QRST");
  det::DetRng rng(2);
  EXPECT_EQ(generate_code(occupied, rng), "QRST");
  occupied.insert("QRST");
  EXPECT_THROW(generate_code(occupied, rng), Error);
}

// ---- over sockets ---------------------------------------------------------------

TEST(Loopback, CreateJoinStartOrderNoEchoAndHashMismatch) {
  const auto start = std::chrono::steady_clock::now();
  const loopback::Result r = loopback::run(1000);
  EXPECT_TRUE(r.started) << r.detail;
  EXPECT_TRUE(r.order_preserved) << r.detail;
  EXPECT_TRUE(r.no_echo) << r.detail;
  EXPECT_TRUE(r.hash_mismatch) << r.detail;
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(10));
}

TEST(Loopback, MalformedFrameGetsProtocolErrorAndDisconnect) {
  loopback::ServerThread server;
  net::Fd fd = net::connect_tcp(server.address());
  const std::uint8_t junk[] = {0, 0, 0, 3, '{', '{', '{'};
  ASSERT_EQ(::send(fd.get(), junk, sizeof junk, MSG_NOSIGNAL), static_cast<ssize_t>(sizeof junk));
  net::TcpTransport t(std::move(fd), proto::kMaxFrameBytes);
  const auto err = loopback::await<proto::ErrorFrame>(t);
  ASSERT_TRUE(err.has_value());
  EXPECT_EQ(err->code, proto::ErrorCode::ProtocolError);
  EXPECT_THROW(
      {
        for (;;) (void)t.receive();
      },
      net::TransportError);
}

TEST(Loopback, SessionsHandshakeThroughTheRelay) {
  loopback::ServerThread server;
  const sim::CounterRules rules;
  std::string code;
  std::mutex mu;
  std::condition_variable cv;

  auto host = loopback::connect(server.address());
  auto guest = loopback::connect(server.address());
  std::optional<session::Session<sim::CounterRules>> host_session;
  std::thread host_thread([&] {
    host_session.emplace(session::create_or_join(*host, rules, "counter-v1", session::Create{2}, {}, {},
                                                 [&](const proto::Frame& f) {
                                                   if (auto* g = std::get_if<proto::GameCreated>(&f)) {
                                                     std::lock_guard lock(mu);
                                                     code = g->code;
                                                     cv.notify_all();
                                                   }
                                                 }));
  });
  {
    std::unique_lock lock(mu);
    ASSERT_TRUE(cv.wait_for(lock, std::chrono::seconds(5), [&] { return !code.empty(); }));
  }
  auto guest_session = session::create_or_join(*guest, rules, "counter-v1", session::Join{code});
  host_thread.join();
  ASSERT_TRUE(host_session.has_value());
  EXPECT_EQ(host_session->player(), PlayerId{0});
  EXPECT_EQ(guest_session.player(), PlayerId{1});
  EXPECT_EQ(host_session->seed(), guest_session.seed());
  EXPECT_EQ(host_session->room_code(), code);

  // One event each way.
  host->send(*host_session->submit_local(KeyPress{"h"}));
  guest_session.on_frame(*loopback::await<proto::Relayed>(*guest));
  EXPECT_EQ(guest_session.log().events.size(), 1u);
}

TEST(Loopback, JoinWithBadCodeSurfacesTypedError) {
  loopback::ServerThread server;
  auto t = loopback::connect(server.address());
  try {
    (void)session::create_or_join(*t, sim::CounterRules{}, "counter-v1", session::Join{"NOPE"});
    FAIL();
  } catch (const session::SessionError& e) {
    EXPECT_EQ(e.code(), session::SessionErrorCode::BadCode);
  }
}

}  // namespace

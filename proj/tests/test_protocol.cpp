#include <doctest.h>

#include <map>

#include "cidp/protocol.hpp"
#include "support/gen.hpp"

using namespace cidp;
using namespace cidp::protocol;
using namespace std::chrono_literals;
namespace ct = cidp::testing;

namespace {

ProtocolParams params(int n_max) {
  ProtocolParams p;
  p.n_max = n_max;
  p.slot = 1000us;
  p.round_period = 20000us;
  p.processing_delay = 23us;
  return p;
}

std::vector<Packet> packets(std::size_t len, std::uint16_t version = 1) {
  Bytes obj(len);
  for (std::size_t i = 0; i < len; ++i) obj[i] = static_cast<std::uint8_t>(i * 3 + 1);
  return framing::fragment(obj, {}, version);
}

template <typename T>
std::vector<T> only(const std::vector<Action>& actions) {
  std::vector<T> out;
  for (const auto& a : actions)
    if (const auto* x = std::get_if<T>(&a)) out.push_back(*x);
  return out;
}

}  // namespace

TEST_CASE("compute_nmax") {
  CHECK(compute_nmax(1) == 1);
  CHECK(compute_nmax(7) == 3);
  CHECK(compute_nmax(8) == 4);
  CHECK(compute_nmax(94) == 7);  // ceil(log2 95)
  CHECK(compute_nmax_floor(94) == 6);
  CHECK(compute_nmax_floor(1) == 1);
  CHECK(compute_nmax_floor(7) == 3);
  for (std::uint32_t n = 1; n < 5000; ++n) {
    int k = compute_nmax(n);
    REQUIRE((1u << k) >= n + 1);
    REQUIRE((1u << (k - 1)) < n + 1);
  }
  CHECK_THROWS_AS(compute_nmax(0), ProtocolError);
  CHECK_THROWS_AS(compute_nmax_floor(0), ProtocolError);
}

TEST_CASE("an idle relay stores and forwards the first packet") {
  auto pk = packets(128);
  auto step = on_packet(make_relay(3), pk[0], 5000us, params(2));
  auto tx = only<Transmit>(step.actions);
  REQUIRE(tx.size() == 1);
  CHECK(step.actions.size() == 1);
  CHECK(tx[0].at == 5023us);
  CHECK(tx[0].packet.header.relay == 1);
  CHECK(tx[0].packet.payload == pk[0].payload);
  CHECK(step.state.n_tx == 1);
  CHECK(step.state.current_seq == 1);
  CHECK(step.state.buffer.count(1));
  CHECK(step.state.total_known == 4);
}

TEST_CASE("a relay at N_max stays silent") {
  auto pk = packets(128);
  auto s = make_relay(3);
  for (int i = 0; i < 2; ++i) s = on_packet(s, pk[0], 1000us * i, params(2)).state;
  CHECK(s.n_tx == 2);
  auto step = on_packet(s, pk[0], 9000us, params(2));
  CHECK(step.actions.empty());
  CHECK(step.state == s);
}

TEST_CASE("the last fragment triggers delivery") {
  auto pk = packets(128);
  auto s = make_relay(3);
  for (int i = 0; i < 3; ++i) s = on_packet(s, pk[i], 1000us * i, params(2)).state;
  CHECK_FALSE(is_complete(s));
  auto step = on_packet(s, pk[3], 7000us, params(2));
  auto done = only<DeliverComplete>(step.actions);
  REQUIRE(done.size() == 1);
  CHECK(done[0].object == framing::reassemble(pk));
  CHECK(done[0].at == 7000us);
  CHECK(is_complete(step.state));
  // Only once.
  auto again = on_packet(step.state, pk[3], 8000us, params(2));
  CHECK(only<DeliverComplete>(again.actions).empty());
}

TEST_CASE("stale versions are ignored and newer versions reset") {
  auto v2 = packets(64, 2);
  auto v1 = packets(64, 1);
  auto s = on_packet(make_relay(1), v2[0], 0us, params(2)).state;
  auto stale = on_packet(s, v1[1], 100us, params(2));
  CHECK(stale.actions.empty());
  CHECK(stale.state == s);

  auto v3 = packets(36, 3);
  auto fresh = on_packet(s, v3[0], 200us, params(2));
  CHECK(fresh.state.current_version == 3);
  CHECK(fresh.state.buffer.size() == 1);
  CHECK(fresh.state.n_tx == 1);
  CHECK(only<DeliverComplete>(fresh.actions).size() == 1);
}

TEST_CASE("late fragments are stored without relaying") {
  auto pk = packets(128);
  auto s = on_packet(make_relay(1), pk[1], 0us, params(2)).state;
  CHECK(s.current_seq == 2);
  auto late = on_packet(s, pk[0], 100us, params(2));
  CHECK(late.actions.empty());
  CHECK(late.state.buffer.count(1));
  CHECK(late.state.current_seq == 2);
  CHECK(late.state.n_tx == 1);
}

TEST_CASE("start_dissemination sends packet 1 and schedules round 2") {
  auto step = start_dissemination(make_relay(0), packets(128), 0us, params(3));
  auto tx = only<Transmit>(step.actions);
  REQUIRE(tx.size() == 1);
  CHECK(std::holds_alternative<Transmit>(step.actions.front()));
  CHECK(tx[0].packet.header.seq == 1);
  CHECK(tx[0].at == 0us);
  CHECK(step.state.n_tx == 1);
  CHECK(step.state.role == Role::initiator);
  CHECK(is_complete(step.state));
  auto timers = only<SetTimer>(step.actions);
  bool round2 = false;
  for (const auto& t : timers)
    if (t.id.kind == TimerId::Kind::round_start) {
      round2 = true;
      CHECK(t.id.round == 2);
      CHECK(t.at == 20000us);
    }
  CHECK(round2);
}

TEST_CASE("a single-packet patch schedules no second round") {
  auto step = start_dissemination(make_relay(0), packets(20), 0us, params(3));
  CHECK(only<Transmit>(step.actions).size() == 1);
  for (const auto& t : only<SetTimer>(step.actions))
    CHECK(t.id.kind != TimerId::Kind::round_start);
}

TEST_CASE("start_dissemination input checks") {
  CHECK_THROWS_AS(start_dissemination(make_relay(0), {}, 0us, params(2)), ProtocolError);
  auto pk = packets(128);
  pk.erase(pk.begin() + 1);
  try {
    start_dissemination(make_relay(0), pk, 0us, params(2));
    FAIL("expected InvalidPackets");
  } catch (const ProtocolError& e) {
    CHECK(e.code() == ProtocolErrc::invalid_packets);
  }
}

TEST_CASE("initiator round timer transmits the next packet") {
  auto s = start_dissemination(make_relay(0), packets(128), 0us, params(3)).state;
  auto step = on_timer(s, {TimerId::Kind::round_start, 2, 0}, 20000us, params(3));
  auto tx = only<Transmit>(step.actions);
  REQUIRE(tx.size() == 1);
  CHECK(tx[0].packet.header.seq == 2);
  CHECK(tx[0].at == 20000us);
  CHECK(step.state.current_seq == 2);
  CHECK(step.state.n_tx == 1);
  bool next = false;
  for (const auto& t : only<SetTimer>(step.actions))
    if (t.id.kind == TimerId::Kind::round_start) {
      next = true;
      CHECK(t.id.round == 3);
      CHECK(t.at == 40000us);
    }
  CHECK(next);
}

TEST_CASE("timeout retransmission respects N_max and supersession") {
  auto p = params(2);
  auto start = start_dissemination(make_relay(0), packets(36), 0us, p);
  auto timers = only<SetTimer>(start.actions);
  REQUIRE(timers.size() == 1);
  CHECK(timers[0].id.kind == TimerId::Kind::retransmit);
  CHECK(timers[0].at == 2 * p.slot);

  auto retx = on_timer(start.state, timers[0].id, timers[0].at, p);
  auto tx = only<Transmit>(retx.actions);
  REQUIRE(tx.size() == 1);
  CHECK(retx.state.n_tx == 2);
  CHECK(tx[0].packet.payload == start.state.source[0].payload);

  // n_tx == N_max: the timeout fires into silence.
  auto none = on_timer(retx.state, {TimerId::Kind::retransmit, 1, 2}, 9000us, p);
  CHECK(only<Transmit>(none.actions).empty());

  // A send since the timer was armed supersedes it.
  auto heard = on_packet(start.state, packets(36)[0], 500us, params(3)).state;
  CHECK(heard.n_tx == 2);
  auto quiet = on_timer(heard, timers[0].id, timers[0].at, params(3));
  CHECK(only<Transmit>(quiet.actions).empty());
}

TEST_CASE("relays own no timers") {
  try {
    on_timer(make_relay(4), {TimerId::Kind::round_start, 1, 0}, 0us, params(2));
    FAIL("expected UnknownTimer");
  } catch (const ProtocolError& e) {
    CHECK(e.code() == ProtocolErrc::unknown_timer);
  }
}

TEST_CASE("transmit bound, monotonic rounds and identical copies under random interleavings") {
  ct::Prng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    int n_max = 1 + static_cast<int>(rng() % 5);
    auto p = params(n_max);
    auto v1 = packets(1 + rng() % 200, 1);
    auto v2 = packets(1 + rng() % 200, 2);
    auto s = make_relay(9);
    std::map<std::pair<int, int>, int> sent;  // (version, seq) -> count
    std::uint8_t last_seq = 0;
    std::uint16_t last_version = 0;
    for (int ev = 0; ev < 60; ++ev) {
      const auto& src = (ev > 40 && rng() % 2) ? v2 : v1;
      Packet pk = src[rng() % src.size()];
      pk.header.relay = static_cast<std::uint8_t>(rng() % 8);
      auto step = on_packet(s, pk, std::chrono::microseconds(ev * 100), p);
      for (const auto& t : only<Transmit>(step.actions)) {
        int c = ++sent[{t.packet.header.version, t.packet.header.seq}];
        REQUIRE(c <= n_max);
        REQUIRE(t.packet.header.seq == step.state.current_seq);
        const auto& orig = (t.packet.header.version == 2 ? v2 : v1)[t.packet.header.seq - 1];
        REQUIRE(t.packet.payload == orig.payload);
        REQUIRE(t.at >= std::chrono::microseconds(ev * 100));
      }
      REQUIRE(step.state.current_version >= last_version);
      if (step.state.current_version == last_version)
        REQUIRE(step.state.current_seq >= last_seq);
      REQUIRE(step.state.n_tx <= n_max);
      last_seq = step.state.current_seq;
      last_version = step.state.current_version;
      // Purity: replaying the same event yields the same result.
      auto replay = on_packet(s, pk, std::chrono::microseconds(ev * 100), p);
      REQUIRE(replay.state == step.state);
      REQUIRE(replay.actions == step.actions);
      s = step.state;
    }
  }
}

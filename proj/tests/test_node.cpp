// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"
#include "xcom/error.hpp"
#include "xcom/node.hpp"

using namespace xcom;
using xcom::testing::fs;
using xcom::testing::Gen;

namespace {

constexpr std::uint64_t k430 = 430'000'000;

BoardNode make(std::size_t index = 0, std::size_t ports = 3, std::int64_t phase = 0) {
  BoardNode::Params p;
  p.index = index;
  p.n_ports = ports;
  p.fabric = {k430, phase};
  BoardNode node(p);
  node.assign_id(static_cast<std::uint8_t>(index));
  return node;
}

// Apply a clock command as the engine would: at its latch point.
ClockApplyResult deliver_clock(BoardNode& n, Command cmd, WallTime t) {
  const RxOutcome out = n.on_delivery(0, Frame{0xF, cmd, 0}, t);
  REQUIRE(out.disposition == RxDisposition::Clock);
  REQUIRE(out.effect);
  return n.apply_clock_command(*out.effect);
}

}  // namespace

TEST_CASE("enqueue_send serializes frames on the board's channel") {
  BoardNode n = make();
  CHECK(n.enqueue_send(Frame{1, Command::Data32, 1}, fs(0)) == fs(0));
  CHECK(n.tx_busy_until() == fs(186'046'511));
  CHECK(n.enqueue_send(Frame{1, Command::Data32, 2}, fs(0)) == fs(186'046'511));
  CHECK(n.tx_busy_until() == fs(372'093'022));
  // An idle channel starts immediately; not_before defers.
  CHECK(n.enqueue_send(Frame{1, Command::Data8, 3}, fs(1'000'000'000)) == fs(1'000'000'000));
  CHECK(n.enqueue_send(Frame{1, Command::Data8, 3}, fs(2'000'000'000), fs(3'000'000'000)) ==
        fs(3'000'000'000));
}

TEST_CASE("the 17th pending send is rejected at depth 16") {
  BoardNode n = make();
  for (int i = 0; i < 16; ++i) CHECK(n.enqueue_send(Frame{1, Command::Data32, 0}, fs(0)));
  CHECK(n.tx_pending(fs(0)) == 16);
  CHECK_FALSE(n.enqueue_send(Frame{1, Command::Data32, 0}, fs(0)));
  // Once the first frame has left the wire there is room again.
  CHECK(n.enqueue_send(Frame{1, Command::Data32, 0}, fs(186'046'511)));
}

TEST_CASE("sending needs an ID, except for probes") {
  BoardNode::Params p;
  BoardNode n(p);
  CHECK_THROWS_AS(n.enqueue_send(Frame{1, Command::Data8, 0}, fs(0)), ProtocolError);
  CHECK(n.enqueue_send(Frame{0xF, Command::AutoIdProbe, 0x1234}, fs(0)));
}

TEST_CASE("property: transmit intervals never overlap") {
  Gen g(41);
  BoardNode n = make();
  WallTime now, prev_end;
  const Command sizes[] = {Command::Data8, Command::Data16, Command::Data32, Command::ClkReset};
  for (int i = 0; i < 5000; ++i) {
    now = now + fs(g.range(0, 200'000'000));
    const Command c = sizes[g.range(0, 3)];
    const auto start = n.enqueue_send(Frame{0xF, c, 0}, now);
    if (!start) continue;
    CHECK(*start >= now);
    CHECK(*start >= prev_end);
    prev_end = *start + frame_latency(c, n.link());
    CHECK(n.tx_busy_until() == prev_end);
  }
}

TEST_CASE("on_delivery stores, filters and counts overflow") {
  BoardNode n = make(1);
  auto out = n.on_delivery(2, Frame{1, Command::Data8, 0x42}, fs(0));
  CHECK(out.disposition == RxDisposition::Stored);
  CHECK(n.rx_last(2)->payload == 0x42);
  CHECK(n.rx_pending(2) == 1);

  out = n.on_delivery(2, Frame{0, Command::Data8, 0x43}, fs(0));
  CHECK(out.disposition == RxDisposition::Filtered);
  CHECK(n.rx_last(2)->payload == 0x42);
  CHECK(n.rx_pending(2) == 1);

  // Broadcast data is accepted.
  out = n.on_delivery(0, Frame{0xF, Command::Data16, 0xBEEF}, fs(0));
  CHECK(out.disposition == RxDisposition::Stored);

  for (std::uint32_t v = 0; v < 16; ++v) n.on_delivery(2, Frame{1, Command::Data8, v}, fs(0));
  CHECK(n.overflow_count() == 1);
  CHECK(n.rx_pending(2) == 16);
  // The oldest entry (0x42) was dropped; FIFO order is kept for the rest.
  for (std::uint32_t v = 0; v < 16; ++v) CHECK(n.pop_rx(2)->payload == v);
  CHECK_FALSE(n.pop_rx(2));
}

TEST_CASE("pop_rx_any takes the lowest port first") {
  BoardNode n = make(0);
  n.on_delivery(2, Frame{0, Command::Data8, 2}, fs(0));
  n.on_delivery(1, Frame{0, Command::Data8, 1}, fs(0));
  n.on_delivery(1, Frame{0, Command::Data8, 11}, fs(0));
  CHECK(n.pop_rx_any()->first == 1);
  CHECK(n.pop_rx_any()->second.payload == 11);
  CHECK(n.pop_rx_any()->first == 2);
  CHECK_FALSE(n.pop_rx_any());
}

TEST_CASE("probes land in the probe slot, not the FIFO") {
  BoardNode::Params p;
  p.n_ports = 2;
  BoardNode n(p);
  const auto out = n.on_delivery(1, Frame{0xF, Command::AutoIdProbe, 0xABCD}, fs(0));
  CHECK(out.disposition == RxDisposition::Probe);
  CHECK(n.probe_seen(1) == std::optional<std::uint16_t>(0xABCD));
  CHECK(n.rx_pending(1) == 0);
  n.clear_probes();
  CHECK_FALSE(n.probe_seen(1));
}

TEST_CASE("clock commands latch one period after delivery on the nominal grid") {
  const auto e = clock_effect_for(Command::ClkReset, {k430, 0}, WallTime::from_ns(100));
  // Oracle: scan the grid for the first edge at or after t + one period.
  const WallTime limit = WallTime::from_ns(100) + fs(2'325'581);
  std::uint64_t k = 0;
  while (edge_time({k430, 0}, k) < limit) ++k;
  CHECK(k == 44);
  CHECK(e.apply_edge == 44);
  CHECK(e.latch_time == fs(102'325'581));
  CHECK(e.apply_time == fs(102'325'581));

  // Phase moves the analog apply time but not the latch edge.
  const auto shifted = clock_effect_for(Command::ClkReset, {k430, 12'000}, WallTime::from_ns(100));
  CHECK(shifted.apply_edge == 44);
  CHECK(shifted.apply_time == fs(102'325'581 + 12'000));
  CHECK(shifted.latch_time == fs(102'325'581));
}

TEST_CASE("RESET, START and STOP") {
  BoardNode n = make();
  CHECK(deliver_clock(n, Command::ClkReset, fs(0)) == ClockApplyResult::Applied);
  CHECK_FALSE(n.clock_state().running);
  CHECK(n.read_abs_clock(WallTime::from_seconds(1)).value() == 0);

  CHECK(deliver_clock(n, Command::ClkStart, WallTime::from_ns(100)) == ClockApplyResult::Applied);
  const std::uint64_t k = n.clock_state().start_edge;
  CHECK(k == 44);
  CHECK(n.read_abs_clock(edge_time(n.nominal(), k + 1000)).value() == 1000);
  CHECK(n.read_abs_clock(edge_time(n.nominal(), k + 10)).value() == 10);
  CHECK(n.read_abs_clock(edge_time(n.nominal(), k + 10) - fs(1)).value() == 9);

  // START while running changes nothing.
  CHECK(deliver_clock(n, Command::ClkStart, WallTime::from_ns(500)) == ClockApplyResult::StartIgnored);
  CHECK(n.clock_state().start_edge == k);

  // STOP at tick 500 freezes the counter.
  const WallTime before_stop = edge_time(n.nominal(), k + 500) - WallTime::from_ns(3);
  deliver_clock(n, Command::ClkStop, before_stop);
  const auto frozen = n.read_abs_clock(edge_time(n.nominal(), k + 500)).value();
  CHECK(frozen == 500);
  CHECK(n.read_abs_clock(WallTime::from_seconds(5)).value() == 500);
}

TEST_CASE("boards free-run from edge zero until reset") {
  BoardNode n = make();
  CHECK(n.clock_state().running);
  CHECK(n.read_abs_clock(edge_time(n.nominal(), 12345)).value() == 12345);
}

TEST_CASE("read_abs_clock wraps after exactly 2^48 edges") {
  BoardNode n = make();
  Gen g(42);
  for (int i = 0; i < 200; ++i) {
    const WallTime t = WallTime(static_cast<__int128>(g.range(0, 1ULL << 60)));
    const WallTime later = t + (edge_time(n.nominal(), AbsTick48::kModulus) - edge_time(n.nominal(), 0));
    CHECK(n.read_abs_clock(t) == n.read_abs_clock(later));
    // Reading is pure.
    CHECK(n.read_abs_clock(t) == n.read_abs_clock(t));
  }
}

TEST_CASE("synced boards with different phases read equal ticks") {
  BoardNode a = make(0, 2, 0);
  BoardNode b = make(1, 2, 37'000);
  for (auto* n : {&a, &b}) {
    deliver_clock(*n, Command::ClkReset, WallTime::from_ns(100));
    deliver_clock(*n, Command::ClkStart, WallTime::from_ns(200));
  }
  Gen g(43);
  for (int i = 0; i < 1000; ++i) {
    const WallTime t = WallTime::from_ns(300) + fs(g.range(0, 1ULL << 50));
    CHECK(a.read_abs_clock(t) == b.read_abs_clock(t));
  }
}

TEST_CASE("flag line") {
  BoardNode n = make();
  CHECK(n.set_flag(true, fs(0)) == fs(0));
  CHECK(n.flag_out());
  // A second toggle within one link cycle queues behind the first.
  CHECK(n.set_flag(false, fs(1000)) == fs(9'302'325));
  // Re-asserting the current level is not a transition.
  CHECK_FALSE(n.set_flag(false, fs(50'000'000)));
  n.on_flag(2, true);
  CHECK(n.flag_in(2));
  CHECK_FALSE(n.flag_in(1));
}

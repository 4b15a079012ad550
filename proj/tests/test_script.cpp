// SPDX-License-Identifier: Apache-2.0
#include <string>

#include "support.hpp"
#include "xcom/error.hpp"
#include "xcom/experiments.hpp"
#include "xcom/network.hpp"
#include "xcom/script.hpp"

using namespace xcom;
using namespace xcom::script;
using xcom::testing::fs;

namespace {

std::size_t parse_error_line(const std::string& text, std::string* message = nullptr) {
  try {
    parse_program(text);
  } catch (const ParseError& e) {
    if (message) *message = e.what();
    return e.line();
  }
  FAIL("no parse error for:\n" << text);
  return 0;
}

// Network with IDs assigned by hand so scripts start at t = 0, edge 0.
struct Rig {
  explicit Rig(std::size_t n, const std::string& text) : net(RunConfig::with_boards(n)) {
    for (std::size_t b = 0; b < n; ++b) net.board(b).assign_id(static_cast<std::uint8_t>(b));
    net.load_program(parse_program(text));
    net.start_scripts();
  }
  std::vector<TraceRecord> records(TraceEvent ev, int board = -1) const {
    std::vector<TraceRecord> out;
    for (const auto& r : net.trace().records())
      if (r.ev == ev && (board < 0 || r.board == board)) out.push_back(r);
    return out;
  }
  Network net;
};

}  // namespace

TEST_CASE("parse a one-board program") {
  const Program p = parse_program("board 0:\n HALT");
  REQUIRE(p.boards.size() == 1);
  CHECK(p.boards[0].board == 0);
  REQUIRE(p.boards[0].code.size() == 1);
  CHECK(std::holds_alternative<Halt>(p.boards[0].code[0].op));
  CHECK_FALSE(p.master());
}

TEST_CASE("branches bind to labels") {
  const Program p = parse_program(
      "board 1:\n"
      "  RECV r1 ANY\n"
      "  BNE r1 0xDEADBEEF fail\n"
      "  PULSE ok\n"
      "  HALT\n"
      "fail:\n"
      "  PULSE fail\n"
      "  HALT\n");
  const BoardProgram& b = *p.find(1);
  const auto& br = std::get<Branch>(b.code[1].op);
  CHECK_FALSE(br.on_equal);
  CHECK(br.reg == 1);
  CHECK(br.imm == 0xDEADBEEF);
  CHECK(br.label == "fail");
  CHECK(br.target == 4);
  CHECK(b.labels.at("fail") == 4);
  CHECK(b.code[1].line == 3);
}

TEST_CASE("syntax details") {
  const Program p = parse_program(
      "; leading comment\n"
      "BOARD 2:   ; trailing comment\n"
      "  set r3 0x10\n"
      "  Send 0 d16 r3\n"
      "  recv r0 1 timeout 100\n"
      "  bcast reset\n"
      "  bcast d8 7\n"
      "  wflag 1 1\n"
      "  setf\n"
      "  clrf\n"
      "  waitt 1000\n"
      "top: jmp top\n");
  const auto& code = p.find(2)->code;
  REQUIRE(code.size() == 10);
  CHECK(std::get<SetReg>(code[0].op).imm == 16);
  const auto& send = std::get<Send>(code[1].op);
  CHECK(send.cmd == Command::Data16);
  CHECK(send.value.is_reg);
  CHECK(send.value.value == 3);
  const auto& recv = std::get<Recv>(code[2].op);
  CHECK(recv.port == std::optional<std::uint8_t>(1));
  CHECK(recv.timeout == std::optional<std::uint64_t>(100));
  CHECK(std::get<Bcast>(code[3].op).cmd == Command::ClkReset);
  CHECK(std::get<Bcast>(code[4].op).value.value == 7);
  CHECK(std::get<WaitTick>(code[8].op).tick.value() == 1000);
  CHECK(std::get<Jump>(code[9].op).target == 9);
}

TEST_CASE("parse errors carry line numbers") {
  std::string msg;
  CHECK(parse_error_line("board 0:\n  SEND 16 D32 0\n", &msg) == 2);
  CHECK(msg.find("16") != std::string::npos);
  CHECK(parse_error_line("board 0:\n  HALT\n  FROB r1\n", &msg) == 3);
  CHECK(msg.find("FROB") != std::string::npos);
  CHECK(parse_error_line("board 0:\n  JMP nowhere\n", &msg) == 2);
  CHECK(msg.find("nowhere") != std::string::npos);
  CHECK(parse_error_line("board 0:\nx:\nx:\n  HALT\n") == 3);
  CHECK(parse_error_line("  HALT\n") == 1);
  CHECK(parse_error_line("board 0:\n  SET r16 1\n") == 2);
  CHECK(parse_error_line("board 0:\n  SEND 1 D8 0x100\n") == 2);
  CHECK(parse_error_line("board 0:\n  SET r1 0x100000000\n") == 2);
  CHECK(parse_error_line("board 0:\n  RECV r14 ANY\n") == 2);
  CHECK(parse_error_line("board 0:\n  WAITT 0x1000000000000\n") == 2);
  CHECK(parse_error_line("board 0:\n  HALT\nboard 0:\n  HALT\n") == 3);
  CHECK(parse_error_line("board 15:\n  HALT\n") == 1);
  CHECK(parse_error_line("board 0:\n  SYNC\nboard 1:\n  SYNC\n") == 4);
  CHECK(parse_error_line("board 0:\n  BCAST DATA99\n") == 2);
  CHECK(parse_error_line("board 0:\n  HALT extra\n") == 2);
}

TEST_CASE("the SYNC board is the master") {
  const Program p = parse_program("board 0:\n HALT\nboard 2:\n SYNC\n HALT\n");
  CHECK(p.master() == std::optional<std::size_t>(2));
}

TEST_CASE("conditional jump takes the right branch") {
  const std::string receiver =
      "board 1:\n"
      "  RECV r1 ANY\n"
      "  BNE r1 0xDEADBEEF fail\n"
      "  PULSE ok\n"
      "  HALT\n"
      "fail:\n"
      "  PULSE fail\n"
      "  HALT\n";
  for (std::uint32_t word : {0xDEADBEEFu, 0x12345678u, 0xDEADBEEEu}) {
    Rig rig(2, "board 0:\n  SEND 1 D32 " + std::to_string(word) + "\n  HALT\n" + receiver);
    rig.net.run_to_idle();
    const auto pulses = rig.records(TraceEvent::Pulse, 1);
    REQUIRE(pulses.size() == 1);
    CHECK(pulses[0].text == (word == 0xDEADBEEF ? "ok" : "fail"));
    CHECK(rig.net.interpreter(1)->reg(1) == word);
    CHECK(rig.net.interpreter(1)->reg(2) == 0);  // source port
  }
}

TEST_CASE("RECV timeout fires at tick 100 and sets the sentinel") {
  Rig rig(2,
          "board 0:\n"
          "  RECV r4 ANY TIMEOUT 100\n"
          "  BEQ r15 1 timed_out\n"
          "  HALT\n"
          "timed_out:\n"
          "  PULSE timeout\n"
          "  HALT\n");
  rig.net.run_to_idle();
  const auto to = rig.records(TraceEvent::RecvTimeout, 0);
  REQUIRE(to.size() == 1);
  CHECK(to[0].edge == 100);
  const auto pulses = rig.records(TraceEvent::Pulse, 0);
  REQUIRE(pulses.size() == 1);
  CHECK(pulses[0].tick == 100);
  CHECK(pulses[0].t == edge_time({430'000'000, 0}, 100));
  CHECK(rig.net.interpreter(0)->reg(4) == kTimeoutSentinel);
  CHECK(rig.net.interpreter(0)->reg(5) == kTimeoutSentinel);
}

TEST_CASE("RECV preserves per-port FIFO order and reports the port") {
  Rig rig(3,
          "board 2:\n"
          "  SEND 0 D8 11\n"
          "  SEND 0 D8 22\n"
          "  SEND 0 D8 33\n"
          "  HALT\n"
          "board 0:\n"
          "  RECV r0 2\n"
          "  RECV r2 2\n"
          "  RECV r4 ANY\n"
          "  HALT\n");
  rig.net.run_to_idle();
  const auto* in = rig.net.interpreter(0);
  CHECK(in->halted());
  CHECK(in->reg(0) == 11);
  CHECK(in->reg(1) == 2);
  CHECK(in->reg(2) == 22);
  CHECK(in->reg(4) == 33);
  CHECK(in->reg(5) == 2);
}

TEST_CASE("SEND takes a register operand and BCAST reaches everyone") {
  Rig rig(3,
          "board 0:\n"
          "  SET r7 0xCAFE\n"
          "  SEND 1 D16 r7\n"
          "  BCAST D8 0x5A\n"
          "  HALT\n"
          "board 1:\n"
          "  RECV r0 0\n"
          "  RECV r1 0\n"
          "  HALT\n"
          "board 2:\n"
          "  RECV r0 0\n"
          "  HALT\n");
  rig.net.run_to_idle();
  CHECK(rig.net.interpreter(1)->reg(0) == 0xCAFE);
  CHECK(rig.net.interpreter(1)->reg(1) == 0x5A);
  CHECK(rig.net.interpreter(2)->reg(0) == 0x5A);
  CHECK(rig.net.board(0).rx_last(0)->payload == 0x5A);  // loopback
}

TEST_CASE("WAITT across the wrap fires after the wrapped distance") {
  Rig rig(2, "board 0:\n  WAITT 5\n  PULSE w\n  HALT\n");
  ClockState s;
  s.running = true;
  s.start_edge = 0;
  s.base = AbsTick48(AbsTick48::kModulus - 10);
  rig.net.board(0).set_clock_state(s);
  rig.net.run_to_idle();
  const auto p = rig.records(TraceEvent::Pulse, 0);
  REQUIRE(p.size() == 1);
  CHECK(p[0].edge == 15);
  CHECK(p[0].tick == 5);
}

TEST_CASE("WAITT for a tick already passed continues at once") {
  Rig rig(2, "board 0:\n  WAITT 20\n  WAITT 10\n  PULSE p\n  HALT\n");
  rig.net.run_to_idle();
  const auto p = rig.records(TraceEvent::Pulse, 0);
  REQUIRE(p.size() == 1);
  CHECK(p[0].tick == 20);
}

TEST_CASE("synced zero-phase boards pulse at the same femtosecond") {
  Rig rig(3,
          "board 0:\n  SYNC\n  WAITT 1000\n  PULSE a\n  HALT\n"
          "board 1:\n  WAITT 1000\n  PULSE a\n  HALT\n"
          "board 2:\n  WAITT 1000\n  PULSE a\n  HALT\n");
  rig.net.run_to_idle();
  const auto p = rig.records(TraceEvent::Pulse);
  REQUIRE(p.size() == 3);
  for (const auto& r : p) {
    CHECK(r.at == p[0].at);
    CHECK(r.tick == 1000);
  }
}

TEST_CASE("WAITT pulses after sync are skewed by exactly the phase spread") {
  RunConfig cfg = RunConfig::with_boards(3);
  cfg.topology.set_phase(1, 12'000);
  cfg.topology.set_phase(2, -8'000);
  const auto out = run_scenario(cfg, parse_program(
                                         "board 0:\n  SYNC\n  WAITT 1000\n  PULSE a\n  HALT\n"
                                         "board 1:\n  WAITT 1000\n  PULSE a\n  HALT\n"
                                         "board 2:\n  WAITT 1000\n  PULSE a\n  HALT\n"));
  CHECK(out.exit_code == kExitOk);
  CHECK(out.summary.pulse_skew.at("a") == fs(20'000));
  CHECK(out.summary.sync_skew == std::optional<WallTime>(fs(20'000)));
}

TEST_CASE("flag token ring circulates in n flag latencies") {
  for (std::size_t n : {2u, 3u, 5u, 15u}) {
    std::string text = "board 0:\n  SETF\n  WFLAG " + std::to_string(n - 1) + " 1\n  PULSE done\n  HALT\n";
    for (std::size_t b = 1; b < n; ++b) {
      text += "board " + std::to_string(b) + ":\n  WFLAG " + std::to_string(b - 1) +
              " 1\n  SETF\n  HALT\n";
    }
    Rig rig(n, text);
    rig.net.run_to_idle();
    const auto done = rig.records(TraceEvent::Pulse, 0);
    REQUIRE(done.size() == 1);
    CHECK(done[0].t == fs(9'302'325 * static_cast<__int128>(n)));
  }
}

TEST_CASE("script faults") {
  SUBCASE("endless loop exhausts the step budget") {
    Rig rig(2, "board 0:\nspin:\n  JMP spin\n");
    rig.net.run_to_idle();
    CHECK(rig.net.interpreter(0)->faulted());
    CHECK(rig.records(TraceEvent::ScriptError).size() == 1);
  }
  SUBCASE("RECV without an ID") {
    RunConfig cfg = RunConfig::with_boards(2);
    cfg.auto_id = false;
    const auto out = run_scenario(cfg, parse_program("board 0:\n  RECV r0 ANY\n  HALT\n"));
    CHECK(out.exit_code == kExitRuntime);
    CHECK(out.summary.script_errors == 1);
  }
  SUBCASE("RECV from a port that does not exist") {
    Rig rig(2, "board 0:\n  RECV r0 9\n  HALT\n");
    rig.net.run_to_idle();
    CHECK(rig.net.interpreter(0)->faulted());
  }
  SUBCASE("program for a board outside the network") {
    Network net(RunConfig::with_boards(2));
    CHECK_THROWS_AS(net.load_program(parse_program("board 5:\n HALT\n")), ConfigError);
  }
}

TEST_CASE("a halted script stays halted") {
  Rig rig(2, "board 0:\n  HALT\n  PULSE never\n");
  rig.net.run_to_idle();
  CHECK(rig.net.interpreter(0)->halted());
  CHECK(rig.records(TraceEvent::Pulse).empty());
  CHECK(rig.records(TraceEvent::Halt).size() == 1);
}

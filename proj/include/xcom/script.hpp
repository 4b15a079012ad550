// SPDX-License-Identifier: Apache-2.0
//
// A small tProc-like scenario language. Each board runs its own program
// against its absolute clock and its XCOM peripheral; boards interact only
// through the fabric. Grammar: docs/script.md.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "xcom/time_core.hpp"
#include "xcom/wire.hpp"

namespace xcom::script {

inline constexpr std::size_t kNumRegs = 16;
inline constexpr std::size_t kStatusReg = 15;
inline constexpr std::uint32_t kTimeoutSentinel = 0xFFFFFFFFu;

struct Operand {
  bool is_reg = false;
  std::uint32_t value = 0;  // register index or immediate
};

struct WaitTick {
  AbsTick48 tick;
};
struct Recv {
  std::uint8_t reg = 0;
  std::optional<std::uint8_t> port;  // nullopt = ANY
  std::optional<std::uint64_t> timeout;
};
struct Send {
  std::uint8_t dst = 0;
  Command cmd = Command::Data32;
  Operand value;
};
struct Bcast {
  Command cmd = Command::ClkReset;
  Operand value;
};
struct SyncCmd {};
struct SetFlag {
  bool level = true;
};
struct WaitFlag {
  std::uint8_t port = 0;
  bool level = true;
};
struct Pulse {
  std::string tag;
};
struct SetReg {
  std::uint8_t reg = 0;
  std::uint32_t imm = 0;
};
struct Branch {
  bool on_equal = true;
  std::uint8_t reg = 0;
  std::uint32_t imm = 0;
  std::string label;
  std::size_t target = 0;
};
struct Jump {
  std::string label;
  std::size_t target = 0;
};
struct Halt {};

using Op = std::variant<WaitTick, Recv, Send, Bcast, SyncCmd, SetFlag, WaitFlag, Pulse, SetReg,
                        Branch, Jump, Halt>;

struct Instruction {
  Op op;
  std::size_t line = 0;
};

struct BoardProgram {
  std::size_t board = 0;
  std::vector<Instruction> code;
  std::map<std::string, std::size_t> labels;
  bool uses_sync = false;
};

struct Program {
  std::vector<BoardProgram> boards;

  const BoardProgram* find(std::size_t board) const;
  /// The board whose program contains SYNC, if any.
  std::optional<std::size_t> master() const;
};

/// Throws ParseError with the offending line number.
Program parse_program(std::string_view text);

/// Everything a running script may observe or do on its own board.
class ScriptHost {
 public:
  struct ClockView {
    bool running = false;
    AbsTick48 tick;
    std::uint64_t edge = 0;  // last nominal fabric edge at or before now
  };

  virtual ~ScriptHost() = default;

  virtual ClockView clock(WallTime t) const = 0;
  virtual WallTime nominal_edge_time(std::uint64_t edge) const = 0;
  virtual bool has_id() const = 0;
  virtual std::size_t n_ports() const = 0;
  /// Pops one received data frame: (port, payload).
  virtual std::optional<std::pair<std::size_t, std::uint32_t>> take_rx(
      std::optional<std::size_t> port) = 0;
  virtual bool flag_in(std::size_t port) const = 0;

  /// May throw ProtocolError (e.g. no ID); the interpreter turns that into a fault.
  virtual void send(const Frame& frame, WallTime t) = 0;
  virtual void start_sync(WallTime t) = 0;
  virtual void set_flag(bool level, WallTime t) = 0;
  virtual void pulse(const std::string& tag, WallTime t) = 0;

  virtual void recv_timeout(std::uint64_t edge, WallTime t) = 0;
  virtual void halted(WallTime t) = 0;
  virtual void fault(const std::string& message, WallTime t) = 0;

  /// The script is blocked; wake it at `at` if given, else only on an event.
  virtual void block(std::optional<WallTime> at) = 0;
};

enum class WaitKind { None, Time, Recv, Flag };

class Interpreter {
 public:
  static constexpr std::uint64_t kStepBudget = 1'000'000;

  explicit Interpreter(const BoardProgram& program) : program_(&program) {}

  /// Runs until the script blocks, halts or faults.
  void step(ScriptHost& host, WallTime t);

  bool halted() const { return halted_; }
  bool faulted() const { return faulted_; }
  WaitKind waiting() const { return waiting_; }
  std::size_t pc() const { return pc_; }
  std::uint32_t reg(std::size_t i) const { return regs_.at(i); }

 private:
  enum class Flow { Next, Jumped, Blocked, Stop };

  Flow exec(const WaitTick& op, ScriptHost& host, WallTime t);
  Flow exec(const Recv& op, ScriptHost& host, WallTime t);
  Flow exec(const Send& op, ScriptHost& host, WallTime t);
  Flow exec(const Bcast& op, ScriptHost& host, WallTime t);
  Flow exec(const SyncCmd& op, ScriptHost& host, WallTime t);
  Flow exec(const SetFlag& op, ScriptHost& host, WallTime t);
  Flow exec(const WaitFlag& op, ScriptHost& host, WallTime t);
  Flow exec(const Pulse& op, ScriptHost& host, WallTime t);
  Flow exec(const SetReg& op, ScriptHost& host, WallTime t);
  Flow exec(const Branch& op, ScriptHost& host, WallTime t);
  Flow exec(const Jump& op, ScriptHost& host, WallTime t);
  Flow exec(const Halt& op, ScriptHost& host, WallTime t);

  Flow fail(ScriptHost& host, const std::string& msg, WallTime t);
  std::uint32_t value_of(const Operand& o) const { return o.is_reg ? regs_[o.value] : o.value; }

  const BoardProgram* program_;
  std::size_t pc_ = 0;
  std::array<std::uint32_t, kNumRegs> regs_{};
  bool halted_ = false;
  bool faulted_ = false;
  WaitKind waiting_ = WaitKind::None;
  std::optional<std::uint64_t> recv_deadline_;
};

}  // namespace xcom::script

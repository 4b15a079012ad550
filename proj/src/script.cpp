// SPDX-License-Identifier: Apache-2.0
#include "xcom/script.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "xcom/error.hpp"

namespace xcom::script {
namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '.' || c == '-';
  });
}

class LineParser {
 public:
  LineParser(std::size_t line, std::vector<std::string> tokens)
      : line_(line), tokens_(std::move(tokens)) {}

  [[noreturn]] void error(const std::string& msg) const { throw ParseError(line_, msg); }

  bool done() const { return pos_ >= tokens_.size(); }

  std::string next(const char* what) {
    if (done()) error(std::string("missing ") + what);
    return tokens_[pos_++];
  }

  void expect_end() const {
    if (!done()) error("unexpected operand '" + tokens_[pos_] + "'");
  }

  std::uint64_t number(const char* what, std::uint64_t max) { return to_number(next(what), what, max); }

  std::uint64_t to_number(const std::string& tok, const char* what, std::uint64_t max) const {
    std::uint64_t v = 0;
    try {
      std::size_t used = 0;
      const bool hex = tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X');
      if (tok.empty() || tok[0] == '-' || tok[0] == '+') throw std::invalid_argument(tok);
      v = std::stoull(hex ? tok.substr(2) : tok, &used, hex ? 16 : 10);
      if (used != (hex ? tok.size() - 2 : tok.size())) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      error(std::string("bad ") + what + " '" + tok + "'");
    }
    if (v > max) {
      error(std::string(what) + " " + tok + " exceeds maximum " + std::to_string(max));
    }
    return v;
  }

  std::uint8_t reg(std::size_t max = kNumRegs - 1) {
    const std::string tok = next("register");
    if (tok.size() < 2 || (tok[0] != 'r' && tok[0] != 'R')) error("expected register, got '" + tok + "'");
    const std::string digits = tok.substr(1);
    if (!std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); }))
      error("expected register, got '" + tok + "'");
    const unsigned long idx = std::stoul(digits);
    if (idx > max) error("register " + tok + " out of range (max r" + std::to_string(max) + ")");
    return static_cast<std::uint8_t>(idx);
  }

  Operand operand(const char* what, std::uint64_t max_imm) {
    if (done()) error(std::string("missing ") + what);
    const std::string& tok = tokens_[pos_];
    if (tok.size() >= 2 && (tok[0] == 'r' || tok[0] == 'R') &&
        std::isdigit(static_cast<unsigned char>(tok[1]))) {
      return {true, reg()};
    }
    return {false, static_cast<std::uint32_t>(number(what, max_imm))};
  }

  Command data_size(const std::string& tok) {
    const std::string u = upper(tok);
    if (u == "D8" || u == "8") return Command::Data8;
    if (u == "D16" || u == "16") return Command::Data16;
    if (u == "D32" || u == "32") return Command::Data32;
    error("bad size class '" + tok + "' (expected D8, D16 or D32)");
  }

  std::string label() {
    std::string tok = next("label");
    if (!is_identifier(tok)) error("bad label '" + tok + "'");
    return tok;
  }

 private:
  std::size_t line_;
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

std::uint64_t payload_max(Command cmd) {
  const unsigned w = payload_width(cmd);
  return w == 0 ? 0 : (std::uint64_t{1} << w) - 1;
}

Op parse_instruction(const std::string& mnemonic, LineParser& p) {
  const std::string m = upper(mnemonic);
  Op op;
  if (m == "WAITT") {
    op = WaitTick{AbsTick48(p.number("tick", AbsTick48::kMask))};
  } else if (m == "RECV") {
    Recv r;
    r.reg = p.reg(kStatusReg - 2);  // reg+1 receives the source port; r15 is status
    const std::string port = p.next("port");
    if (upper(port) != "ANY") r.port = static_cast<std::uint8_t>(p.to_number(port, "port", 14));
    if (!p.done()) {
      const std::string kw = p.next("TIMEOUT");
      if (upper(kw) != "TIMEOUT") p.error("expected TIMEOUT, got '" + kw + "'");
      r.timeout = p.number("timeout", AbsTick48::kMask);
    }
    op = r;
  } else if (m == "SEND") {
    Send s;
    s.dst = static_cast<std::uint8_t>(p.number("destination", 0xF));
    s.cmd = p.data_size(p.next("size class"));
    s.value = p.operand("payload", payload_max(s.cmd));
    op = s;
  } else if (m == "BCAST") {
    Bcast b;
    const std::string kind = upper(p.next("command"));
    if (kind == "RESET" || kind == "CLK_RESET") {
      b.cmd = Command::ClkReset;
    } else if (kind == "START" || kind == "CLK_START") {
      b.cmd = Command::ClkStart;
    } else if (kind == "STOP" || kind == "CLK_STOP") {
      b.cmd = Command::ClkStop;
    } else if (kind == "NOP") {
      b.cmd = Command::Nop;
    } else {
      b.cmd = p.data_size(kind);
    }
    if (is_data_command(b.cmd)) b.value = p.operand("payload", payload_max(b.cmd));
    op = b;
  } else if (m == "SYNC") {
    op = SyncCmd{};
  } else if (m == "SETF") {
    op = SetFlag{true};
  } else if (m == "CLRF") {
    op = SetFlag{false};
  } else if (m == "WFLAG") {
    WaitFlag w;
    w.port = static_cast<std::uint8_t>(p.number("port", 14));
    w.level = p.number("level", 1) != 0;
    op = w;
  } else if (m == "PULSE") {
    const std::string tag = p.next("tag");
    if (!is_identifier(tag)) p.error("bad pulse tag '" + tag + "'");
    op = Pulse{tag};
  } else if (m == "SET") {
    SetReg s;
    s.reg = p.reg();
    s.imm = static_cast<std::uint32_t>(p.number("immediate", 0xFFFFFFFFu));
    op = s;
  } else if (m == "BEQ" || m == "BNE") {
    Branch b;
    b.on_equal = m == "BEQ";
    b.reg = p.reg();
    b.imm = static_cast<std::uint32_t>(p.number("immediate", 0xFFFFFFFFu));
    b.label = p.label();
    op = b;
  } else if (m == "JMP") {
    op = Jump{p.label(), 0};
  } else if (m == "HALT") {
    op = Halt{};
  } else {
    p.error("unknown mnemonic '" + mnemonic + "'");
  }
  p.expect_end();
  return op;
}

}  // namespace

const BoardProgram* Program::find(std::size_t board) const {
  for (const auto& b : boards)
    if (b.board == board) return &b;
  return nullptr;
}

std::optional<std::size_t> Program::master() const {
  for (const auto& b : boards)
    if (b.uses_sync) return b.board;
  return std::nullopt;
}

Program parse_program(std::string_view text) {
  Program prog;
  BoardProgram* current = nullptr;
  std::optional<std::size_t> sync_board;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto c = raw.find(';'); c != std::string::npos) raw.erase(c);
    std::istringstream ls(raw);
    std::vector<std::string> tokens;
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;

    // "board <n>:" section header; the colon may be attached or separate.
    if (upper(tokens[0]) == "BOARD") {
      std::string num = tokens.size() > 1 ? tokens[1] : "";
      const bool colon_attached = !num.empty() && num.back() == ':';
      if (colon_attached) num.pop_back();
      const std::size_t expect = colon_attached ? 2 : 3;
      if (tokens.size() != expect || (!colon_attached && tokens[2] != ":")) {
        throw ParseError(line_no, "expected 'board <n>:'");
      }
      const auto board =
          static_cast<std::size_t>(LineParser(line_no, {}).to_number(num, "board index", 14));
      if (prog.find(board)) throw ParseError(line_no, "duplicate section for board " + num);
      prog.boards.push_back(BoardProgram{board, {}, {}, false});
      current = &prog.boards.back();
      continue;
    }

    if (!current) throw ParseError(line_no, "instruction outside a 'board <n>:' section");

    std::size_t first = 0;
    while (first < tokens.size() && tokens[first].size() > 1 && tokens[first].back() == ':') {
      const std::string name = tokens[first].substr(0, tokens[first].size() - 1);
      if (!is_identifier(name)) throw ParseError(line_no, "bad label '" + name + "'");
      if (!current->labels.emplace(name, current->code.size()).second) {
        throw ParseError(line_no, "duplicate label '" + name + "'");
      }
      ++first;
    }
    if (first == tokens.size()) continue;

    LineParser p(line_no, std::vector<std::string>(tokens.begin() + first + 1, tokens.end()));
    Op op = parse_instruction(tokens[first], p);
    if (std::holds_alternative<SyncCmd>(op)) {
      if (sync_board && *sync_board != current->board) {
        throw ParseError(line_no, "SYNC allowed only in the master's program (already used by board " +
                                      std::to_string(*sync_board) + ")");
      }
      sync_board = current->board;
      current->uses_sync = true;
    }
    current->code.push_back(Instruction{std::move(op), line_no});
  }

  for (auto& board : prog.boards) {
    for (auto& ins : board.code) {
      auto resolve = [&](const std::string& label, std::size_t& target) {
        auto it = board.labels.find(label);
        if (it == board.labels.end()) {
          throw ParseError(ins.line, "unresolved label '" + label + "'");
        }
        target = it->second;
      };
      if (auto* b = std::get_if<Branch>(&ins.op)) resolve(b->label, b->target);
      if (auto* j = std::get_if<Jump>(&ins.op)) resolve(j->label, j->target);
    }
  }
  return prog;
}

// ---------------------------------------------------------------------------

void Interpreter::step(ScriptHost& host, WallTime t) {
  if (halted_) return;
  waiting_ = WaitKind::None;
  for (std::uint64_t budget = 0; budget < kStepBudget; ++budget) {
    if (pc_ >= program_->code.size()) {
      halted_ = true;
      host.halted(t);
      return;
    }
    const Instruction& ins = program_->code[pc_];
    const Flow flow = std::visit([&](const auto& op) { return exec(op, host, t); }, ins.op);
    switch (flow) {
      case Flow::Next:
        ++pc_;
        break;
      case Flow::Jumped:
        break;
      case Flow::Blocked:
      case Flow::Stop:
        return;
    }
  }
  fail(host, "instruction budget exhausted without blocking", t);
}

Interpreter::Flow Interpreter::fail(ScriptHost& host, const std::string& msg, WallTime t) {
  halted_ = true;
  faulted_ = true;
  waiting_ = WaitKind::None;
  const std::size_t line = pc_ < program_->code.size() ? program_->code[pc_].line : 0;
  host.fault("line " + std::to_string(line) + ": " + msg, t);
  return Flow::Stop;
}

Interpreter::Flow Interpreter::exec(const WaitTick& op, ScriptHost& host, WallTime t) {
  const auto cv = host.clock(t);
  if (!cv.running) {
    waiting_ = WaitKind::Time;
    host.block(std::nullopt);
    return Flow::Blocked;
  }
  if (!tick_before(cv.tick, op.tick)) return Flow::Next;
  waiting_ = WaitKind::Time;
  host.block(host.nominal_edge_time(cv.edge + tick_distance(cv.tick, op.tick)));
  return Flow::Blocked;
}

Interpreter::Flow Interpreter::exec(const Recv& op, ScriptHost& host, WallTime t) {
  if (!host.has_id()) return fail(host, "RECV on a board without an XCOM ID", t);
  if (op.port && *op.port >= host.n_ports()) {
    return fail(host, "RECV port " + std::to_string(*op.port) + " does not exist", t);
  }
  std::optional<std::size_t> port;
  if (op.port) port = *op.port;
  if (auto item = host.take_rx(port)) {
    regs_[op.reg] = item->second;
    regs_[op.reg + 1] = static_cast<std::uint32_t>(item->first);
    regs_[kStatusReg] = 0;
    recv_deadline_.reset();
    return Flow::Next;
  }
  waiting_ = WaitKind::Recv;
  if (!op.timeout) {
    host.block(std::nullopt);
    return Flow::Blocked;
  }
  const std::uint64_t edge = host.clock(t).edge;
  if (!recv_deadline_) recv_deadline_ = edge + *op.timeout;
  if (edge >= *recv_deadline_) {
    regs_[op.reg] = kTimeoutSentinel;
    regs_[op.reg + 1] = kTimeoutSentinel;
    regs_[kStatusReg] = 1;
    recv_deadline_.reset();
    waiting_ = WaitKind::None;
    host.recv_timeout(edge, t);
    return Flow::Next;
  }
  host.block(host.nominal_edge_time(*recv_deadline_));
  return Flow::Blocked;
}

Interpreter::Flow Interpreter::exec(const Send& op, ScriptHost& host, WallTime t) {
  const std::uint32_t v = value_of(op.value);
  if (v > payload_max(op.cmd)) {
    return fail(host, "payload exceeds " + std::string(command_name(op.cmd)) + " width", t);
  }
  try {
    host.send(Frame{op.dst, op.cmd, v}, t);
  } catch (const ProtocolError& e) {
    return fail(host, e.what(), t);
  }
  return Flow::Next;
}

Interpreter::Flow Interpreter::exec(const Bcast& op, ScriptHost& host, WallTime t) {
  const std::uint32_t v = is_data_command(op.cmd) ? value_of(op.value) : 0;
  if (v > payload_max(op.cmd)) {
    return fail(host, "payload exceeds " + std::string(command_name(op.cmd)) + " width", t);
  }
  try {
    host.send(Frame{kBroadcastAddr, op.cmd, v}, t);
  } catch (const ProtocolError& e) {
    return fail(host, e.what(), t);
  }
  return Flow::Next;
}

Interpreter::Flow Interpreter::exec(const SyncCmd&, ScriptHost& host, WallTime t) {
  try {
    host.start_sync(t);
  } catch (const ProtocolError& e) {
    return fail(host, e.what(), t);
  }
  return Flow::Next;
}

Interpreter::Flow Interpreter::exec(const SetFlag& op, ScriptHost& host, WallTime t) {
  host.set_flag(op.level, t);
  return Flow::Next;
}

Interpreter::Flow Interpreter::exec(const WaitFlag& op, ScriptHost& host, WallTime t) {
  if (op.port >= host.n_ports()) {
    return fail(host, "WFLAG port " + std::to_string(op.port) + " does not exist", t);
  }
  if (host.flag_in(op.port) == op.level) return Flow::Next;
  waiting_ = WaitKind::Flag;
  host.block(std::nullopt);
  return Flow::Blocked;
}

Interpreter::Flow Interpreter::exec(const Pulse& op, ScriptHost& host, WallTime t) {
  host.pulse(op.tag, t);
  return Flow::Next;
}

Interpreter::Flow Interpreter::exec(const SetReg& op, ScriptHost&, WallTime) {
  regs_[op.reg] = op.imm;
  return Flow::Next;
}

Interpreter::Flow Interpreter::exec(const Branch& op, ScriptHost&, WallTime) {
  if ((regs_[op.reg] == op.imm) != op.on_equal) return Flow::Next;
  pc_ = op.target;
  return Flow::Jumped;
}

Interpreter::Flow Interpreter::exec(const Jump& op, ScriptHost&, WallTime) {
  pc_ = op.target;
  return Flow::Jumped;
}

Interpreter::Flow Interpreter::exec(const Halt&, ScriptHost& host, WallTime t) {
  halted_ = true;
  host.halted(t);
  return Flow::Stop;
}

}  // namespace xcom::script

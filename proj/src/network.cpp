// SPDX-License-Identifier: Apache-2.0
#include "xcom/network.hpp"

#include <string>

#include "xcom/error.hpp"

namespace xcom {

class Network::Host final : public script::ScriptHost {
 public:
  Host(Network& net, std::size_t board) : net_(net), board_(board) {}

  ClockView clock(WallTime t) const override {
    const BoardNode& node = net_.board(board_);
    ClockView v;
    v.running = node.clock_state().running;
    v.tick = node.read_abs_clock(t);
    v.edge = node.current_edge(t).value_or(0);
    return v;
  }

  WallTime nominal_edge_time(std::uint64_t edge) const override {
    return edge_time(net_.board(board_).nominal(), edge);
  }

  bool has_id() const override { return net_.board(board_).id().has_value(); }
  std::size_t n_ports() const override { return net_.board(board_).n_ports(); }

  std::optional<std::pair<std::size_t, std::uint32_t>> take_rx(
      std::optional<std::size_t> port) override {
    BoardNode& node = net_.board(board_);
    if (port) {
      if (auto f = node.pop_rx(*port)) return std::pair{*port, f->payload};
      return std::nullopt;
    }
    if (auto item = node.pop_rx_any()) return std::pair{item->first, item->second.payload};
    return std::nullopt;
  }

  bool flag_in(std::size_t port) const override { return net_.board(board_).flag_in(port); }

  void send(const Frame& frame, WallTime) override { net_.send(board_, frame); }
  void start_sync(WallTime) override { net_.start_sync(board_); }
  void set_flag(bool level, WallTime) override { net_.set_flag(board_, level); }

  void pulse(const std::string& tag, WallTime t) override {
    const BoardNode& node = net_.board(board_);
    TraceRecord r = base(t, TraceEvent::Pulse);
    r.edge = node.current_edge(t).value_or(0);
    r.tick = node.read_abs_clock(t).value();
    r.at = edge_time(node.fabric(), r.edge);
    r.text = tag;
    net_.record(std::move(r));
  }

  void recv_timeout(std::uint64_t edge, WallTime t) override {
    TraceRecord r = base(t, TraceEvent::RecvTimeout);
    r.edge = edge;
    net_.record(std::move(r));
  }

  void halted(WallTime t) override { net_.record(base(t, TraceEvent::Halt)); }

  void fault(const std::string& message, WallTime t) override {
    TraceRecord r = base(t, TraceEvent::ScriptError);
    r.text = message;
    net_.record(std::move(r));
  }

  void block(std::optional<WallTime> at) override { net_.block(board_, at); }

 private:
  TraceRecord base(WallTime t, TraceEvent ev) const {
    TraceRecord r;
    r.t = t;
    r.board = static_cast<int>(board_);
    r.ev = ev;
    return r;
  }

  Network& net_;
  std::size_t board_;
};

Network::Network(const RunConfig& cfg) : cfg_(cfg), engine_(cfg.seed) {
  cfg_.validate();
  const std::size_t n = cfg_.boards();
  nodes_.reserve(n);
  for (std::size_t b = 0; b < n; ++b) {
    BoardNode::Params p;
    p.index = b;
    p.n_ports = n;
    p.fabric = cfg_.fabric(b);
    p.link = cfg_.link;
    p.fifo_depth = cfg_.fifo_depth;
    p.tx_queue_depth = cfg_.tx_queue_depth;
    nodes_.emplace_back(p);
    if (!cfg_.start_edge.empty()) {
      nodes_.back().set_clock_state(ClockState{true, cfg_.start_edge[b], AbsTick48{}});
    }
  }
  interp_.resize(n);
  hosts_.resize(n);
  wake_gen_.assign(n, 0);
  wake_pending_.assign(n, std::nullopt);
}

Network::~Network() = default;

void Network::record(TraceRecord r) { engine_.trace().push(std::move(r)); }

void Network::load_program(const script::Program& program) {
  for (const auto& section : program.boards) {
    if (section.board >= size()) {
      throw ConfigError("scenario has a section for board " + std::to_string(section.board) +
                        " but the network has " + std::to_string(size()) + " boards");
    }
  }
  program_ = program;
  for (std::size_t b = 0; b < size(); ++b) {
    const script::BoardProgram* section = program_.find(b);
    interp_[b] = section ? std::make_unique<script::Interpreter>(*section) : nullptr;
    hosts_[b] = section ? std::make_unique<Host>(*this, b) : nullptr;
  }
  if (auto m = program_.master()) nodes_[*m].set_master(true);
}

void Network::start_scripts() {
  for (std::size_t b = 0; b < size(); ++b) {
    if (interp_[b]) wake(b, script::WaitKind::None);
  }
}

const script::Interpreter* Network::interpreter(std::size_t board) const {
  return interp_.at(board).get();
}

std::optional<TxTicket> Network::send(std::size_t board, const Frame& frame, WallTime not_before) {
  BoardNode& node = nodes_.at(board);
  const auto start = node.enqueue_send(frame, now(), not_before);
  if (!start) {
    TraceRecord r;
    r.t = now();
    r.board = static_cast<int>(board);
    r.ev = TraceEvent::TxBackpressure;
    r.frame = frame;
    record(std::move(r));
    return std::nullopt;
  }
  const std::uint64_t msg = next_msg_++;
  engine_.schedule(*start, TxStartEv{board, msg, frame});
  return TxTicket{msg, *start};
}

void Network::send_at(WallTime t, std::size_t board, const Frame& frame) {
  engine_.schedule(t, SendEv{board, frame});
}

void Network::set_flag(std::size_t board, bool level) {
  const auto start = nodes_.at(board).set_flag(level, now());
  if (!start) return;
  TraceRecord r;
  r.t = now();
  r.board = static_cast<int>(board);
  r.ev = TraceEvent::FlagTx;
  r.level = level;
  r.at = *start;
  record(std::move(r));
  for (const auto& d : schedule_transmission(topology(), board, FlagToggle{level}, *start, cfg_.link)) {
    engine_.schedule(d.t_deliver, FlagDeliveryEv{d.dst_board, d.rx_port, level});
  }
}

void Network::probe_at(WallTime t) { engine_.schedule(t, ProbeEv{next_probe_++}); }

TxTicket Network::start_sync(std::size_t master) {
  for (const auto& node : nodes_) {
    if (!node.id()) {
      throw ProtocolError("sync refused: board " + std::to_string(node.index()) +
                          " has no XCOM ID");
    }
  }
  nodes_.at(master).set_master(true);
  const auto reset = send(master, Frame{kBroadcastAddr, Command::ClkReset, 0});
  if (!reset) throw ProtocolError("sync refused: master Tx queue full");
  const WallTime gap = WallTime(cfg_.link.period().fs() * cfg_.sync_gap_cycles);
  const WallTime start_at = reset->start + frame_latency(Command::ClkReset, cfg_.link) + gap;
  const auto start = send(master, Frame{kBroadcastAddr, Command::ClkStart, 0}, start_at);
  if (!start) throw ProtocolError("sync refused: master Tx queue full");
  return *start;
}

void Network::run_until(WallTime horizon) { engine_.run_until(horizon, *this); }
void Network::run_to_idle() { engine_.run_to_idle(*this); }

void Network::dispatch(const Event& ev) {
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, TxStartEv>) {
          on_tx_start(body);
        } else if constexpr (std::is_same_v<T, TxEndEv>) {
          TraceRecord r;
          r.t = now();
          r.board = static_cast<int>(body.board);
          r.ev = TraceEvent::TxEnd;
          r.msg = body.msg;
          record(std::move(r));
        } else if constexpr (std::is_same_v<T, DeliveryEv>) {
          on_delivery(body);
        } else if constexpr (std::is_same_v<T, FlagDeliveryEv>) {
          on_flag(body);
        } else if constexpr (std::is_same_v<T, ClkApplyEv>) {
          on_clock(body);
        } else if constexpr (std::is_same_v<T, ScriptWakeEv>) {
          if (wake_pending_[body.board] == body.gen) wake_pending_[body.board].reset();
          if (body.gen != wake_gen_[body.board] || !interp_[body.board]) return;
          interp_[body.board]->step(*hosts_[body.board], now());
        } else if constexpr (std::is_same_v<T, SendEv>) {
          try {
            send(body.board, body.frame);
          } catch (const ProtocolError& e) {
            TraceRecord r;
            r.t = now();
            r.board = static_cast<int>(body.board);
            r.ev = TraceEvent::ScriptError;
            r.text = e.what();
            record(std::move(r));
          }
        } else if constexpr (std::is_same_v<T, ProbeEv>) {
          on_probe(body);
        }
      },
      ev.body);
}

void Network::on_tx_start(const TxStartEv& ev) {
  const WallTime latency = frame_latency(ev.frame.cmd, cfg_.link);
  TraceRecord r;
  r.t = now();
  r.board = static_cast<int>(ev.board);
  r.ev = TraceEvent::TxStart;
  r.msg = ev.msg;
  r.frame = ev.frame;
  r.at = now() + latency;
  record(std::move(r));

  engine_.schedule(now() + latency, TxEndEv{ev.board, ev.msg});
  for (const auto& d : schedule_transmission(topology(), ev.board, ev.frame, now(), cfg_.link)) {
    engine_.schedule(d.t_deliver, DeliveryEv{d.dst_board, d.rx_port, ev.msg, ev.frame});
  }
}

void Network::on_delivery(const DeliveryEv& ev) {
  BoardNode& node = nodes_[ev.board];
  const RxOutcome out = node.on_delivery(ev.port, ev.frame, now());

  TraceRecord r;
  r.t = now();
  r.board = static_cast<int>(ev.board);
  r.port = static_cast<int>(ev.port);
  r.msg = ev.msg;
  r.frame = ev.frame;
  r.ev = out.disposition == RxDisposition::Filtered ? TraceEvent::RxFiltered : TraceEvent::RxDeliver;
  record(r);

  if (out.dropped) {
    r.ev = TraceEvent::RxOverflow;
    r.frame = *out.dropped;
    record(std::move(r));
  }
  if (out.effect) {
    engine_.schedule(out.effect->latch_time, ClkApplyEv{ev.board, ev.msg, *out.effect});
  }
  if (out.disposition == RxDisposition::Stored) wake(ev.board, script::WaitKind::Recv);
}

void Network::on_flag(const FlagDeliveryEv& ev) {
  nodes_[ev.board].on_flag(ev.port, ev.level);
  TraceRecord r;
  r.t = now();
  r.board = static_cast<int>(ev.board);
  r.ev = TraceEvent::FlagEdge;
  r.port = static_cast<int>(ev.port);
  r.level = ev.level;
  record(std::move(r));
  wake(ev.board, script::WaitKind::Flag);
}

void Network::on_clock(const ClkApplyEv& ev) {
  const ClockApplyResult res = nodes_[ev.board].apply_clock_command(ev.effect);
  TraceRecord r;
  r.t = now();
  r.board = static_cast<int>(ev.board);
  r.ev = res == ClockApplyResult::Applied ? TraceEvent::ClkApplied : TraceEvent::ClkNoop;
  r.msg = ev.msg;
  r.frame = Frame{kBroadcastAddr, ev.effect.cmd, 0};
  r.edge = ev.effect.apply_edge;
  r.at = ev.effect.apply_time;
  record(std::move(r));
  wake(ev.board, script::WaitKind::Time);
}

void Network::on_probe(const ProbeEv&) {
  for (const auto& node : nodes_) {
    TraceRecord r;
    r.t = now();
    r.board = static_cast<int>(node.index());
    r.ev = TraceEvent::Probe;
    r.tick = node.read_abs_clock(now()).value();
    r.edge = node.current_edge(now()).value_or(0);
    record(std::move(r));
  }
}

void Network::wake(std::size_t board, script::WaitKind reason) {
  const auto& interp = interp_[board];
  if (!interp || interp->halted()) return;
  if (reason != script::WaitKind::None && interp->waiting() != reason) return;
  if (wake_pending_[board] == wake_gen_[board]) return;
  wake_pending_[board] = wake_gen_[board];
  engine_.schedule(now(), ScriptWakeEv{board, wake_gen_[board]});
}

void Network::block(std::size_t board, std::optional<WallTime> at) {
  const std::uint64_t gen = ++wake_gen_[board];
  if (at) engine_.schedule(*at, ScriptWakeEv{board, gen});
}

}  // namespace xcom

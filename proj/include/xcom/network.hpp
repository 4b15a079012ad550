// SPDX-License-Identifier: Apache-2.0
//
// One simulated XCOM network: n boards on a full mesh, driven by a single
// engine. Owns the board nodes and per-board script interpreters and turns
// engine events into node state changes and trace records.
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "xcom/config.hpp"
#include "xcom/engine.hpp"
#include "xcom/fabric.hpp"
#include "xcom/node.hpp"
#include "xcom/script.hpp"

namespace xcom {

struct TxTicket {
  std::uint64_t msg;
  WallTime start;
};

class Network final : private Dispatcher {
 public:
  explicit Network(const RunConfig& cfg);
  ~Network() override;
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  std::size_t size() const { return nodes_.size(); }
  const RunConfig& config() const { return cfg_; }
  const Topology& topology() const { return cfg_.topology; }

  Engine& engine() { return engine_; }
  const Engine& engine() const { return engine_; }
  const Trace& trace() const { return engine_.trace(); }
  WallTime now() const { return engine_.now(); }

  BoardNode& board(std::size_t i) { return nodes_.at(i); }
  const BoardNode& board(std::size_t i) const { return nodes_.at(i); }

  /// Attaches per-board programs. The program is copied. Throws ConfigError
  /// for sections naming a board outside the network.
  void load_program(const script::Program& program);
  /// Schedules every loaded script to begin at the current time.
  void start_scripts();
  const script::Interpreter* interpreter(std::size_t board) const;

  /// Enqueues a frame on `board`'s channel now. Returns nullopt (and traces
  /// tx_backpressure) when the Tx queue is full. Throws ProtocolError when
  /// the board has no ID.
  std::optional<TxTicket> send(std::size_t board, const Frame& frame,
                               WallTime not_before = WallTime{});
  void send_at(WallTime t, std::size_t board, const Frame& frame);
  void set_flag(std::size_t board, bool level);
  void probe_at(WallTime t);

  /// Master broadcasts CLK_RESET, then CLK_START after the configured gap.
  /// Returns the START ticket. Throws ProtocolError if any board lacks an ID.
  TxTicket start_sync(std::size_t master);

  void run_until(WallTime horizon);
  void run_to_idle();

 private:
  class Host;
  friend class Host;

  void dispatch(const Event& ev) override;
  void on_tx_start(const TxStartEv& ev);
  void on_delivery(const DeliveryEv& ev);
  void on_flag(const FlagDeliveryEv& ev);
  void on_clock(const ClkApplyEv& ev);
  void on_probe(const ProbeEv& ev);

  void wake(std::size_t board, script::WaitKind reason);
  void block(std::size_t board, std::optional<WallTime> at);
  void record(TraceRecord r);

  RunConfig cfg_;
  Engine engine_;
  std::vector<BoardNode> nodes_;
  script::Program program_;
  std::vector<std::unique_ptr<script::Interpreter>> interp_;
  std::vector<std::unique_ptr<Host>> hosts_;
  std::vector<std::uint64_t> wake_gen_;
  std::vector<std::optional<std::uint64_t>> wake_pending_;
  std::uint64_t next_msg_ = 1;
  std::uint64_t next_probe_ = 1;
};

}  // namespace xcom

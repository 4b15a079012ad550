// SPDX-License-Identifier: Apache-2.0
//
// Per-board XCOM peripheral: Tx serialization on the board's own channel,
// Rx filtering and storage for every port, the flag line, and the 48-bit
// absolute clock driven by RESET/START/STOP commands.
//
// Clock commands latch on the shared nominal fabric grid (phase 0). A
// board's phase_fs shows up only in analog timestamps (apply_time, pulse
// times), never in which edge a command lands on.
#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "xcom/time_core.hpp"
#include "xcom/wire.hpp"

namespace xcom {

struct ClockCommandEffect {
  Command cmd = Command::ClkReset;
  std::uint64_t apply_edge = 0;
  /// Analog instant of the latch edge on this board: edge_time(fabric, apply_edge).
  WallTime apply_time;
  /// Same edge on the nominal grid; the engine dispatches the effect here.
  WallTime latch_time;
};

/// First nominal edge at or after delivery + one fabric period.
ClockCommandEffect clock_effect_for(Command cmd, const ClockDomain& fabric, WallTime delivered);

struct ClockState {
  bool running = false;
  std::uint64_t start_edge = 0;
  AbsTick48 base;
};

enum class RxDisposition { Filtered, Stored, Probe, Clock };

struct RxOutcome {
  RxDisposition disposition = RxDisposition::Filtered;
  std::optional<Frame> dropped;  // oldest FIFO entry evicted on overflow
  std::optional<ClockCommandEffect> effect;
};

enum class ClockApplyResult { Applied, StartIgnored };

class BoardNode {
 public:
  struct Params {
    std::size_t index = 0;
    std::size_t n_ports = 2;
    ClockDomain fabric;
    LinkClock link;
    std::size_t fifo_depth = 16;
    std::size_t tx_queue_depth = 16;
  };

  explicit BoardNode(const Params& p);

  std::size_t index() const { return index_; }
  std::size_t n_ports() const { return rx_fifo_.size(); }
  const ClockDomain& fabric() const { return fabric_; }
  ClockDomain nominal() const { return {fabric_.freq_hz, 0}; }
  const LinkClock& link() const { return link_; }

  std::optional<std::uint8_t> id() const { return id_; }
  void assign_id(std::uint8_t id) { id_ = id; }
  void clear_id() { id_.reset(); }
  bool is_master() const { return is_master_; }
  void set_master(bool m) { is_master_ = m; }

  /// Returns the transmit start time, or nullopt when the Tx queue is full.
  /// Throws ProtocolError when the board has no ID (probes excepted).
  std::optional<WallTime> enqueue_send(const Frame& frame, WallTime t_now,
                                       WallTime not_before = WallTime{});
  WallTime tx_busy_until() const { return tx_busy_until_; }
  std::size_t tx_pending(WallTime t_now) const;

  RxOutcome on_delivery(std::size_t port, const Frame& frame, WallTime t);
  const std::optional<Frame>& rx_last(std::size_t port) const { return rx_last_.at(port); }
  std::size_t rx_pending(std::size_t port) const { return rx_fifo_.at(port).size(); }
  std::optional<Frame> pop_rx(std::size_t port);
  /// Lowest-indexed non-empty port wins.
  std::optional<std::pair<std::size_t, Frame>> pop_rx_any();
  std::uint64_t overflow_count() const { return overflow_count_; }

  const std::optional<std::uint16_t>& probe_seen(std::size_t port) const {
    return probe_seen_.at(port);
  }
  void clear_probes();

  ClockApplyResult apply_clock_command(const ClockCommandEffect& effect);
  AbsTick48 read_abs_clock(WallTime t) const;
  const ClockState& clock_state() const { return clock_; }
  void set_clock_state(const ClockState& s) { clock_ = s; }
  /// Last nominal edge at or before t.
  std::optional<std::uint64_t> current_edge(WallTime t) const;

  /// Drives the flag line. Returns the toggle's transmit start, or nullopt
  /// when the level is unchanged.
  std::optional<WallTime> set_flag(bool level, WallTime t);
  bool flag_out() const { return flag_out_; }
  bool flag_in(std::size_t port) const { return flag_in_.at(port); }
  void on_flag(std::size_t port, bool level) { flag_in_.at(port) = level; }

 private:
  std::size_t index_;
  ClockDomain fabric_;
  LinkClock link_;
  std::size_t fifo_depth_;
  std::size_t tx_queue_depth_;

  std::optional<std::uint8_t> id_;
  bool is_master_ = false;

  ClockState clock_{true, 0, AbsTick48{}};

  WallTime tx_busy_until_;
  std::deque<WallTime> tx_inflight_;  // end times of accepted frames

  std::vector<std::optional<Frame>> rx_last_;
  std::vector<std::deque<Frame>> rx_fifo_;
  std::vector<std::optional<std::uint16_t>> probe_seen_;
  std::uint64_t overflow_count_ = 0;

  bool flag_out_ = false;
  WallTime flag_busy_until_;
  std::vector<bool> flag_in_;
};

}  // namespace xcom

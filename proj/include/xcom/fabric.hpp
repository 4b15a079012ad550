// SPDX-License-Identifier: Apache-2.0
//
// Full-mesh wiring through the fanout hub. Board i's Tx pair is copied to Rx
// port i on every board, itself included. The hub is pure wiring: every
// buffer and cable contributes only to the per-(src, dst) delay.
#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "xcom/time_core.hpp"
#include "xcom/wire.hpp"

namespace xcom {

inline constexpr std::size_t kMaxBoards = 15;

class Topology {
 public:
  /// Loopback-only single board. build_full_mesh requires at least two.
  static Topology single_board(WallTime loopback_delay = WallTime{});

  std::size_t size() const { return n_; }
  WallTime delay(std::size_t src, std::size_t dst) const;
  std::int64_t phase(std::size_t board) const;
  const std::vector<std::int64_t>& phases() const { return phase_fs_; }

  void set_link_delay(std::size_t src, std::size_t dst, WallTime delay);
  void set_phase(std::size_t board, std::int64_t phase_fs);

  /// True when every entry of the delay matrix is equal.
  bool matched() const;

  friend Topology build_full_mesh(std::size_t n, WallTime default_delay);

 private:
  Topology(std::size_t n, WallTime delay);
  void check_index(std::size_t i, const char* what) const;

  std::size_t n_ = 0;
  std::vector<WallTime> delay_fs_;  // row-major [src][dst]
  std::vector<std::int64_t> phase_fs_;
};

Topology build_full_mesh(std::size_t n, WallTime default_delay);

/// A level change on a board's out-of-band flag line.
struct FlagToggle {
  bool level = false;
  friend bool operator==(const FlagToggle&, const FlagToggle&) = default;
};

using Transmission = std::variant<Frame, FlagToggle>;

struct Delivery {
  std::size_t dst_board;
  std::size_t rx_port;
  Transmission what;
  WallTime t_deliver;
};

WallTime serialization_latency(const Transmission& what, const LinkClock& clk);

/// One delivery per board (loopback included), in board order.
std::vector<Delivery> schedule_transmission(const Topology& topo, std::size_t src,
                                            const Transmission& what, WallTime t_start,
                                            const LinkClock& clk);

}  // namespace xcom

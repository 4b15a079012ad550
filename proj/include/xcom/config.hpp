// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "xcom/fabric.hpp"
#include "xcom/time_core.hpp"
#include "xcom/wire.hpp"

namespace xcom {

inline constexpr std::uint64_t kDefaultFabricHz = 430'000'000;

/// Everything a run needs besides the scenario program.
///
/// File form is a flat YAML mapping; recognised keys:
///   boards, link_clock_hz, fabric_clock_hz, link_delay_fs (scalar or n x n
///   matrix), phase_fs (list), seed, horizon_fs, fifo_depth, tx_queue_depth,
///   start_edge (list), auto_id, sync_gap_cycles, autoid_max_rounds.
struct RunConfig {
  std::uint64_t seed = 1;
  WallTime horizon = WallTime::from_seconds(1);
  std::uint64_t fabric_clock_hz = kDefaultFabricHz;
  LinkClock link;
  Topology topology = build_full_mesh(2, WallTime{});
  std::size_t fifo_depth = 16;
  std::size_t tx_queue_depth = 16;
  /// Edge at which each board's free-running counter started before any
  /// RESET. Empty means every board started at edge 0.
  std::vector<std::uint64_t> start_edge;
  bool auto_id = true;
  std::uint32_t sync_gap_cycles = 10;
  std::uint32_t autoid_max_rounds = 8;

  std::size_t boards() const { return topology.size(); }
  ClockDomain fabric(std::size_t board) const { return {fabric_clock_hz, topology.phase(board)}; }

  /// n-board full mesh with zero delays and phases.
  static RunConfig with_boards(std::size_t n);

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

RunConfig parse_config(std::string_view yaml_text);
RunConfig load_config(const std::string& path);

}  // namespace xcom

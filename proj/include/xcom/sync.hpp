// SPDX-License-Identifier: Apache-2.0
//
// Network-level procedures: AUTO-ID, master-driven clock sync, pulse skew.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "xcom/network.hpp"
#include "xcom/time_core.hpp"
#include "xcom/trace.hpp"

namespace xcom {

struct AutoIdResult {
  std::vector<std::uint8_t> ids;  // indexed by board
  std::uint32_t rounds = 0;
};

/// Source of per-board probe nonces: (board, round) -> nonce. Defaults to
/// the engine's per-board RNG stream.
using NonceSource = std::function<std::uint16_t(std::size_t board, std::uint32_t round)>;

/// Every board broadcasts AUTOID_PROBE with a random 16-bit nonce; a board
/// that hears its own nonce on exactly one port adopts that port as its ID.
/// Any duplicate nonce is visible to all boards and forces a fresh round.
/// Throws ProtocolError after `max_rounds` failed rounds.
AutoIdResult run_auto_id(Network& net, std::uint32_t max_rounds = 8, NonceSource nonces = {});

struct SyncReport {
  std::size_t master = 0;
  std::vector<WallTime> apply_time;  // analog START latch time per board
  std::vector<std::uint64_t> apply_edge;
  WallTime skew;
  bool aligned = false;
  WallTime probe_time;
};

/// Master broadcasts RESET then START; runs the engine until quiet.
/// Throws ProtocolError when any board lacks an ID.
SyncReport run_clock_sync(Network& net, std::size_t master);

/// Max minus min.
WallTime spread(const std::vector<WallTime>& times);

/// Max pairwise difference of the analog times of `tag` pulses, one per
/// board in [0, n_boards). Throws ProtocolError naming absent boards.
WallTime measure_pulse_skew(const Trace& trace, std::string_view tag, std::size_t n_boards);

}  // namespace xcom

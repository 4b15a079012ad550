// SPDX-License-Identifier: Apache-2.0
#include "xcom/sync.hpp"

#include <algorithm>
#include <optional>
#include <string>

#include "xcom/error.hpp"

namespace xcom {

AutoIdResult run_auto_id(Network& net, std::uint32_t max_rounds, NonceSource nonces) {
  const std::size_t n = net.size();
  if (!nonces) {
    nonces = [&net](std::size_t board, std::uint32_t) {
      return static_cast<std::uint16_t>(net.engine().rng_draw(board, 16));
    };
  }

  for (std::uint32_t round = 1; round <= max_rounds; ++round) {
    std::vector<std::uint16_t> mine(n);
    for (std::size_t b = 0; b < n; ++b) {
      net.board(b).clear_id();
      net.board(b).clear_probes();
      mine[b] = nonces(b, round);
    }
    for (std::size_t b = 0; b < n; ++b) {
      net.send(b, Frame{kBroadcastAddr, Command::AutoIdProbe, mine[b]});
    }
    net.run_to_idle();

    // Each board decides from what it heard. All boards hear the same set of
    // nonces, so they reach the same verdict on collisions.
    bool collision = false;
    std::vector<std::optional<std::uint8_t>> found(n);
    for (std::size_t b = 0; b < n && !collision; ++b) {
      const BoardNode& node = net.board(b);
      std::vector<std::uint16_t> heard;
      for (std::size_t p = 0; p < n; ++p) {
        const auto& seen = node.probe_seen(p);
        if (!seen) throw ProtocolError("auto-id: board " + std::to_string(b) +
                                       " heard nothing on port " + std::to_string(p));
        if (std::find(heard.begin(), heard.end(), *seen) != heard.end()) collision = true;
        heard.push_back(*seen);
        if (*seen == mine[b]) found[b] = static_cast<std::uint8_t>(p);
      }
      if (!found[b]) collision = true;
    }

    if (collision) {
      TraceRecord r;
      r.t = net.now();
      r.ev = TraceEvent::AutoIdRetry;
      r.round = round;
      net.engine().trace().push(std::move(r));
      continue;
    }

    AutoIdResult result;
    result.rounds = round;
    for (std::size_t b = 0; b < n; ++b) {
      net.board(b).assign_id(*found[b]);
      result.ids.push_back(*found[b]);
      TraceRecord r;
      r.t = net.now();
      r.board = static_cast<int>(b);
      r.ev = TraceEvent::AutoId;
      r.port = *found[b];
      r.round = round;
      net.engine().trace().push(std::move(r));
    }
    return result;
  }
  throw ProtocolError("auto-id failed after " + std::to_string(max_rounds) + " rounds");
}

WallTime spread(const std::vector<WallTime>& times) {
  if (times.empty()) return WallTime{};
  const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
  return *hi - *lo;
}

SyncReport run_clock_sync(Network& net, std::size_t master) {
  const std::size_t n = net.size();
  if (master >= n) throw ProtocolError("master index out of range");
  const std::size_t mark = net.trace().size();
  const TxTicket start = net.start_sync(master);
  net.run_to_idle();

  SyncReport rep;
  rep.master = master;
  rep.apply_time.assign(n, WallTime{});
  rep.apply_edge.assign(n, 0);
  std::vector<bool> seen(n, false);
  const auto& recs = net.trace().records();
  for (std::size_t i = mark; i < recs.size(); ++i) {
    const auto& r = recs[i];
    if (r.msg != start.msg || (r.ev != TraceEvent::ClkApplied && r.ev != TraceEvent::ClkNoop)) {
      continue;
    }
    const auto b = static_cast<std::size_t>(r.board);
    rep.apply_time[b] = r.at;
    rep.apply_edge[b] = r.edge;
    seen[b] = true;
  }
  for (std::size_t b = 0; b < n; ++b) {
    if (!seen[b]) throw ProtocolError("sync: board " + std::to_string(b) + " never latched START");
  }
  rep.skew = spread(rep.apply_time);

  // Compare counters well after the last latch.
  const std::uint64_t last_edge = *std::max_element(rep.apply_edge.begin(), rep.apply_edge.end());
  rep.probe_time = edge_time(net.board(0).nominal(), last_edge + 1000);
  const AbsTick48 ref = net.board(0).read_abs_clock(rep.probe_time);
  rep.aligned = true;
  for (std::size_t b = 0; b < n; ++b) {
    if (!(net.board(b).read_abs_clock(rep.probe_time) == ref)) rep.aligned = false;
  }
  return rep;
}

WallTime measure_pulse_skew(const Trace& trace, std::string_view tag, std::size_t n_boards) {
  std::vector<std::optional<WallTime>> at(n_boards);
  for (const auto& r : trace.records()) {
    if (r.ev != TraceEvent::Pulse || r.text != tag) continue;
    if (r.board < 0 || static_cast<std::size_t>(r.board) >= n_boards) continue;
    auto& slot = at[static_cast<std::size_t>(r.board)];
    if (slot) {
      throw ProtocolError("pulse '" + std::string(tag) + "' emitted twice by board " +
                          std::to_string(r.board));
    }
    slot = r.at;
  }
  std::string missing;
  std::vector<WallTime> times;
  for (std::size_t b = 0; b < n_boards; ++b) {
    if (at[b]) {
      times.push_back(*at[b]);
    } else {
      missing += (missing.empty() ? "" : ",") + std::to_string(b);
    }
  }
  if (!missing.empty()) {
    throw ProtocolError("pulse '" + std::string(tag) + "' missing on boards " + missing);
  }
  if (times.size() < 2) throw ProtocolError("pulse skew needs at least two boards");
  return spread(times);
}

}  // namespace xcom

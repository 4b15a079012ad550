// SPDX-License-Identifier: Apache-2.0
//
// Simulation trace. One record per line:
//
//   t=<fs> b=<board|-> ev=<name> key=value ...
//
// Keys appear in a fixed order per event name; payloads are hex and all
// times are integer femtoseconds. The first line names the schema version.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xcom/time_core.hpp"
#include "xcom/wire.hpp"

namespace xcom {

inline constexpr std::string_view kTraceSchema = "# xcom-trace v1";

enum class TraceEvent : std::uint8_t {
  TxStart,
  TxEnd,
  RxDeliver,
  RxFiltered,
  RxOverflow,
  TxBackpressure,
  ClkApplied,
  ClkNoop,
  FlagTx,
  FlagEdge,
  Pulse,
  AutoId,
  AutoIdRetry,
  Probe,
  RecvTimeout,
  Halt,
  ScriptError,
};

std::string_view trace_event_name(TraceEvent ev);
std::optional<TraceEvent> trace_event_from_name(std::string_view name);

struct TraceRecord {
  WallTime t;
  int board = -1;
  TraceEvent ev = TraceEvent::Halt;
  int port = -1;
  std::uint64_t msg = 0;
  Frame frame;
  std::uint64_t edge = 0;
  std::uint64_t tick = 0;
  WallTime at;  // analog time (pulse, clk_applied) or end/start time (tx_start, flag_tx)
  bool level = false;
  std::uint32_t round = 0;
  std::string text;  // pulse tag or diagnostic

  std::string to_line() const;
};

class Trace {
 public:
  void push(TraceRecord r) { records_.push_back(std::move(r)); }
  const std::vector<TraceRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  void clear() { records_.clear(); }

  void write(std::ostream& os) const;
  std::string str() const;

  std::size_t count(TraceEvent ev) const;

 private:
  std::vector<TraceRecord> records_;
};

}  // namespace xcom

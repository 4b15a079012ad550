// SPDX-License-Identifier: Apache-2.0
#include "xcom/trace.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace xcom {
namespace {

constexpr std::array<std::string_view, 17> kNames = {
    "tx_start",  "tx_end",   "rx_deliver", "rx_filtered",  "rx_overflow", "tx_backpressure",
    "clk_applied", "clk_noop", "flag_tx",  "flag_edge",    "pulse",       "autoid",
    "autoid_retry", "probe", "recv_timeout", "halt",       "script_error",
};

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llX", static_cast<unsigned long long>(v));
  return buf;
}

// Payloads are zero-padded to their size class; header-only frames print "-".
std::string payload_hex(const Frame& f) {
  const unsigned width = payload_width(f.cmd);
  if (width == 0) return "-";
  const int digits = static_cast<int>(std::min(width, 32u) / 4);
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%0*llX", digits,
                static_cast<unsigned long long>(f.payload));
  return buf;
}

}  // namespace

std::string_view trace_event_name(TraceEvent ev) { return kNames[static_cast<std::size_t>(ev)]; }

std::optional<TraceEvent> trace_event_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return static_cast<TraceEvent>(i);
  return std::nullopt;
}

std::string TraceRecord::to_line() const {
  std::string s = "t=" + to_string(t) + " b=" + (board < 0 ? "-" : std::to_string(board)) +
                  " ev=" + std::string(trace_event_name(ev));
  auto kv = [&s](std::string_view k, const std::string& v) {
    s += ' ';
    s += k;
    s += '=';
    s += v;
  };
  auto frame_fields = [&](bool with_payload) {
    kv("dst", hex(frame.dst));
    kv("cmd", std::string(command_name(frame.cmd)));
    if (with_payload) kv("payload", payload_hex(frame));
  };

  switch (ev) {
    case TraceEvent::TxStart:
      kv("msg", std::to_string(msg));
      frame_fields(true);
      kv("end", to_string(at));
      break;
    case TraceEvent::TxEnd:
      kv("msg", std::to_string(msg));
      break;
    case TraceEvent::RxDeliver:
      kv("port", std::to_string(port));
      kv("msg", std::to_string(msg));
      frame_fields(true);
      break;
    case TraceEvent::RxFiltered:
      kv("port", std::to_string(port));
      kv("msg", std::to_string(msg));
      frame_fields(false);
      break;
    case TraceEvent::RxOverflow:
      kv("port", std::to_string(port));
      kv("dropped", payload_hex(frame));
      break;
    case TraceEvent::TxBackpressure:
      frame_fields(true);
      break;
    case TraceEvent::ClkApplied:
    case TraceEvent::ClkNoop:
      kv("msg", std::to_string(msg));
      kv("cmd", std::string(command_name(frame.cmd)));
      kv("edge", std::to_string(edge));
      kv("at", to_string(at));
      break;
    case TraceEvent::FlagTx:
      kv("level", level ? "1" : "0");
      kv("start", to_string(at));
      break;
    case TraceEvent::FlagEdge:
      kv("port", std::to_string(port));
      kv("level", level ? "1" : "0");
      break;
    case TraceEvent::Pulse:
      kv("tag", text);
      kv("edge", std::to_string(edge));
      kv("tick", std::to_string(tick));
      kv("at", to_string(at));
      break;
    case TraceEvent::AutoId:
      kv("id", std::to_string(port));
      kv("round", std::to_string(round));
      break;
    case TraceEvent::AutoIdRetry:
      kv("round", std::to_string(round));
      break;
    case TraceEvent::Probe:
      kv("tick", std::to_string(tick));
      kv("edge", std::to_string(edge));
      break;
    case TraceEvent::RecvTimeout:
      kv("edge", std::to_string(edge));
      break;
    case TraceEvent::Halt:
      break;
    case TraceEvent::ScriptError:
      kv("msg", "\"" + text + "\"");
      break;
  }
  return s;
}

void Trace::write(std::ostream& os) const {
  os << kTraceSchema << '\n';
  for (const auto& r : records_) os << r.to_line() << '\n';
}

std::string Trace::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

std::size_t Trace::count(TraceEvent ev) const {
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(),
                                                [ev](const TraceRecord& r) { return r.ev == ev; }));
}

}  // namespace xcom

// SPDX-License-Identifier: Apache-2.0
//
// Scenario runner, run summaries, and the built-in validation experiments.
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xcom/config.hpp"
#include "xcom/script.hpp"
#include "xcom/sync.hpp"
#include "xcom/trace.hpp"

namespace xcom {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,  // also config errors
  kExitParse = 2,
  kExitRuntime = 3,
};

struct LatencyStats {
  std::uint64_t count = 0;
  WallTime min;
  WallTime max;
  int128 sum_fs = 0;
  int128 sum_sq_fs = 0;

  void add(WallTime x);
  long double mean_fs() const;
  /// Population variance in fs^2; exactly zero iff all samples are equal.
  long double variance_fs2() const;
  bool all_equal() const { return count == 0 || min == max; }
};

struct RunSummary {
  std::uint64_t message_count = 0;
  LatencyStats latency;
  std::optional<WallTime> sync_skew;
  std::map<std::string, WallTime> pulse_skew;
  std::map<std::string, std::size_t> pulse_count;
  std::uint64_t script_errors = 0;
  std::uint64_t backpressure = 0;
  std::uint64_t overflows = 0;
  std::uint64_t recv_timeouts = 0;
  std::uint64_t events = 0;
  double runtime_s = 0.0;
};

/// Message latencies are measured for accepted DATA* deliveries, from the
/// sender's tx_start to the receiver's rx_deliver.
RunSummary summarize(const Trace& trace);

/// Per-delivery latency samples: (msg, receiving board, latency).
struct LatencySample {
  std::uint64_t msg;
  int src;
  int dst;
  Command cmd;
  WallTime latency;
};
std::vector<LatencySample> message_latencies(const Trace& trace);

std::string summary_json(const RunSummary& s, int indent = 2);

struct ScenarioOutcome {
  int exit_code = kExitOk;
  std::string diagnostic;
  Trace trace;
  RunSummary summary;
};

/// AUTO-ID (if enabled), then scripts until queue empty or horizon.
ScenarioOutcome run_scenario(const RunConfig& cfg, const script::Program& program);

struct ScenarioFiles {
  std::string config_path;
  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::optional<WallTime> horizon;
  std::string out_dir;  // empty: no files written
};

/// File-level driver behind `xcomsim run`. Diagnostics go to `err`.
int run_scenario_files(const ScenarioFiles& files, std::ostream& err,
                       ScenarioOutcome* outcome = nullptr);

struct LatencyExperiment {
  RunSummary summary;
  WallTime expected;       // wire-model prediction
  bool identical = false;  // every sample equal
  bool matches_wire = false;
  Trace trace;
};

/// `count` messages round-robin: message i goes from board i%n to (i+1)%n.
/// Each board sends once per frame time, so all channels run concurrently.
LatencyExperiment experiment_latency(std::size_t n_boards, Command size, std::uint64_t link_hz,
                                     std::uint64_t count, std::uint64_t seed = 1);

/// Uniform integer phases in [-max_abs, +max_abs] femtoseconds.
std::vector<std::int64_t> random_phases(std::uint64_t seed, std::size_t n, std::int64_t max_abs);

struct SyncExperiment {
  AutoIdResult auto_id;
  SyncReport report;
  std::vector<WallTime> probe_skews;
  std::vector<std::uint64_t> probe_ticks;  // target tick per probe (unwrapped)
  bool stable = false;   // every probe skew equals the sync skew
  bool aligned = false;  // counters equal at every probe instant
  bool crossed_wrap = false;
  Trace trace;
};

/// AUTO-ID, one sync from board 0, then pulse probes at common ticks across
/// `horizon` of simulated time. When the horizon passes the 48-bit wrap,
/// probes are placed just before and after it.
SyncExperiment experiment_sync(std::size_t n_boards, const std::vector<std::int64_t>& phases,
                               WallTime horizon, std::uint64_t seed = 1,
                               std::size_t n_probes = 16);

struct WrapExperiment {
  WallTime wrap_period;
  std::vector<std::uint64_t> pre_tick, post_tick;
  std::vector<std::uint64_t> pre_edge, post_edge;
  WallTime pre_skew, post_skew;
  bool ok = false;
  Trace trace;
};

/// Synced boards WAITT through the midpoint to 2^48 - 10, pulse, WAITT for
/// 5, pulse.
WrapExperiment experiment_wrap(std::size_t n_boards, const std::vector<std::int64_t>& phases,
                               std::uint64_t seed = 1);

}  // namespace xcom

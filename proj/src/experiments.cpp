// SPDX-License-Identifier: Apache-2.0
#include "xcom/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "xcom/engine.hpp"
#include "xcom/error.hpp"
#include "xcom/network.hpp"

namespace xcom {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

nlohmann::ordered_json fs_json(WallTime t) {
  if (t.fs() >= INT64_MIN && t.fs() <= INT64_MAX) return static_cast<std::int64_t>(t.fs());
  return to_string(t);
}

constexpr std::uint64_t kPayloadStream = 0x5041594CULL;  // "PAYL"
constexpr std::uint64_t kPhaseStream = 0x50484153ULL;    // "PHAS"

}  // namespace

void LatencyStats::add(WallTime x) {
  if (count == 0 || x < min) min = x;
  if (count == 0 || x > max) max = x;
  ++count;
  sum_fs += x.fs();
  sum_sq_fs += x.fs() * x.fs();
}

long double LatencyStats::mean_fs() const {
  return count == 0 ? 0.0L : static_cast<long double>(sum_fs) / static_cast<long double>(count);
}

long double LatencyStats::variance_fs2() const {
  if (count == 0) return 0.0L;
  // n * sum(x^2) - sum(x)^2 is exact in 128 bits for our magnitudes.
  const int128 n = count;
  const int128 num = n * sum_sq_fs - sum_fs * sum_fs;
  return static_cast<long double>(num) / (static_cast<long double>(n) * static_cast<long double>(n));
}

std::vector<LatencySample> message_latencies(const Trace& trace) {
  struct Tx {
    WallTime t;
    int src;
  };
  std::unordered_map<std::uint64_t, Tx> started;
  std::vector<LatencySample> out;
  for (const auto& r : trace.records()) {
    if (r.ev == TraceEvent::TxStart) {
      started[r.msg] = Tx{r.t, r.board};
    } else if (r.ev == TraceEvent::RxDeliver && is_data_command(r.frame.cmd)) {
      auto it = started.find(r.msg);
      if (it == started.end()) continue;
      out.push_back({r.msg, it->second.src, r.board, r.frame.cmd, r.t - it->second.t});
    }
  }
  return out;
}

RunSummary summarize(const Trace& trace) {
  RunSummary s;
  for (const auto& sample : message_latencies(trace)) s.latency.add(sample.latency);
  s.message_count = s.latency.count;

  std::map<std::uint64_t, std::vector<WallTime>> starts;
  std::map<std::string, std::vector<WallTime>> pulses;
  for (const auto& r : trace.records()) {
    switch (r.ev) {
      case TraceEvent::ClkApplied:
      case TraceEvent::ClkNoop:
        if (r.frame.cmd == Command::ClkStart) starts[r.msg].push_back(r.at);
        break;
      case TraceEvent::Pulse:
        pulses[r.text].push_back(r.at);
        break;
      case TraceEvent::ScriptError:
        ++s.script_errors;
        break;
      case TraceEvent::TxBackpressure:
        ++s.backpressure;
        break;
      case TraceEvent::RxOverflow:
        ++s.overflows;
        break;
      case TraceEvent::RecvTimeout:
        ++s.recv_timeouts;
        break;
      default:
        break;
    }
  }
  if (!starts.empty()) s.sync_skew = spread(starts.rbegin()->second);
  for (const auto& [tag, times] : pulses) {
    s.pulse_count[tag] = times.size();
    s.pulse_skew[tag] = spread(times);
  }
  return s;
}

std::string summary_json(const RunSummary& s, int indent) {
  nlohmann::ordered_json j;
  j["message_count"] = s.message_count;
  auto& lat = j["latency_fs"];
  if (s.latency.count > 0) {
    lat["min"] = fs_json(s.latency.min);
    lat["max"] = fs_json(s.latency.max);
    lat["mean"] = static_cast<double>(s.latency.mean_fs());
    lat["variance"] = static_cast<double>(s.latency.variance_fs2());
  } else {
    lat = nullptr;
  }
  j["sync_skew_fs"] = s.sync_skew ? fs_json(*s.sync_skew) : nlohmann::ordered_json(nullptr);
  auto& pulses = j["pulses"];
  pulses = nlohmann::ordered_json::object();
  for (const auto& [tag, skew] : s.pulse_skew) {
    pulses[tag] = {{"count", s.pulse_count.at(tag)}, {"skew_fs", fs_json(skew)}};
  }
  j["script_errors"] = s.script_errors;
  j["backpressure"] = s.backpressure;
  j["rx_overflows"] = s.overflows;
  j["recv_timeouts"] = s.recv_timeouts;
  j["events"] = s.events;
  j["runtime_s"] = s.runtime_s;
  return j.dump(indent);
}

ScenarioOutcome run_scenario(const RunConfig& cfg, const script::Program& program) {
  const auto t0 = Clock::now();
  ScenarioOutcome out;
  Network net(cfg);
  try {
    net.load_program(program);
    if (cfg.auto_id) run_auto_id(net, cfg.autoid_max_rounds);
    net.start_scripts();
    net.run_until(cfg.horizon);
  } catch (const ConfigError& e) {
    out.exit_code = kExitUsage;
    out.diagnostic = e.what();
  } catch (const ProtocolError& e) {
    out.exit_code = kExitRuntime;
    out.diagnostic = e.what();
  } catch (const InternalFault& e) {
    out.exit_code = kExitRuntime;
    out.diagnostic = std::string("internal fault: ") + e.what();
  }
  out.trace = net.trace();
  out.summary = summarize(out.trace);
  out.summary.events = net.engine().executed();
  out.summary.runtime_s = seconds_since(t0);
  if (out.exit_code == kExitOk && out.summary.script_errors > 0) {
    out.exit_code = kExitRuntime;
    for (const auto& r : out.trace.records()) {
      if (r.ev == TraceEvent::ScriptError) {
        out.diagnostic = "board " + std::to_string(r.board) + ": " + r.text;
        break;
      }
    }
  }
  return out;
}

int run_scenario_files(const ScenarioFiles& files, std::ostream& err, ScenarioOutcome* outcome) {
  RunConfig cfg;
  try {
    cfg = load_config(files.config_path);
    if (files.seed) cfg.seed = *files.seed;
    if (files.horizon) cfg.horizon = *files.horizon;
    cfg.validate();
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (cfg.link.exceeds_rated()) {
    err << "warning: link clock " << cfg.link.freq_hz << " Hz exceeds the rated "
        << LinkClock::kRatedMaxHz << " Hz\n";
  }

  std::ifstream in(files.scenario_path);
  if (!in) {
    err << "cannot open scenario '" << files.scenario_path << "'\n";
    return kExitUsage;
  }
  std::ostringstream text;
  text << in.rdbuf();

  script::Program program;
  try {
    program = script::parse_program(text.str());
  } catch (const ParseError& e) {
    err << files.scenario_path << ":" << e.line() << ": parse error: "
        << std::string(e.what()).substr(std::string(e.what()).find(": ") + 2) << '\n';
    return kExitParse;
  }

  ScenarioOutcome out = run_scenario(cfg, program);
  if (!out.diagnostic.empty()) err << "runtime error: " << out.diagnostic << '\n';

  if (!files.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(files.out_dir, ec);
    std::ofstream trace_out(std::filesystem::path(files.out_dir) / "trace.txt", std::ios::binary);
    std::ofstream summary_out(std::filesystem::path(files.out_dir) / "summary.json");
    if (!trace_out || !summary_out) {
      err << "cannot write to output directory '" << files.out_dir << "'\n";
      return kExitUsage;
    }
    out.trace.write(trace_out);
    summary_out << summary_json(out.summary) << '\n';
  }
  const int code = out.exit_code;
  if (outcome) *outcome = std::move(out);
  return code;
}

LatencyExperiment experiment_latency(std::size_t n_boards, Command size, std::uint64_t link_hz,
                                     std::uint64_t count, std::uint64_t seed) {
  if (!is_data_command(size)) throw ConfigError("latency experiment needs a DATA size class");
  const auto t0 = Clock::now();
  RunConfig cfg = RunConfig::with_boards(n_boards);
  cfg.link.freq_hz = link_hz;
  cfg.seed = seed;
  cfg.validate();

  Network net(cfg);
  run_auto_id(net, cfg.autoid_max_rounds);

  const WallTime frame = frame_latency(size, cfg.link);
  const WallTime base = net.now();
  const unsigned width = payload_width(size);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::size_t src = i % n_boards;
    const auto dst = static_cast<std::uint8_t>((i + 1) % n_boards);
    const auto payload = static_cast<std::uint32_t>(net.engine().rng_draw(kPayloadStream + src, width));
    const WallTime when = base + WallTime(frame.fs() * static_cast<int128>(i / n_boards));
    net.send_at(when, src, Frame{dst, size, payload});
  }
  net.run_to_idle();

  LatencyExperiment out;
  out.expected = frame;
  out.matches_wire = true;
  for (const auto& s : message_latencies(net.trace())) {
    const WallTime predicted = frame_latency(s.cmd, cfg.link) +
                               cfg.topology.delay(static_cast<std::size_t>(s.src),
                                                  static_cast<std::size_t>(s.dst));
    if (s.latency != predicted) out.matches_wire = false;
  }
  out.summary = summarize(net.trace());
  out.summary.events = net.engine().executed();
  out.summary.runtime_s = seconds_since(t0);
  out.identical = out.summary.latency.count == count && out.summary.latency.all_equal();
  if (out.summary.latency.count != count) out.matches_wire = false;
  out.trace = net.trace();
  return out;
}

std::vector<std::int64_t> random_phases(std::uint64_t seed, std::size_t n, std::int64_t max_abs) {
  std::vector<std::int64_t> out(n);
  const auto span = static_cast<std::uint64_t>(2 * max_abs + 1);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<std::int64_t>(counter_rng(seed, kPhaseStream, i) % span) - max_abs;
  }
  return out;
}

namespace {

RunConfig config_with_phases(std::size_t n, const std::vector<std::int64_t>& phases,
                             std::uint64_t seed) {
  RunConfig cfg = RunConfig::with_boards(n);
  cfg.seed = seed;
  if (!phases.empty()) {
    if (phases.size() != n) throw ConfigError("need one phase per board");
    for (std::size_t b = 0; b < n; ++b) cfg.topology.set_phase(b, phases[b]);
  }
  cfg.validate();
  return cfg;
}

std::string program_text(std::size_t n, const std::string& body) {
  std::string text;
  for (std::size_t b = 0; b < n; ++b) text += "board " + std::to_string(b) + ":\n" + body;
  return text;
}

}  // namespace

SyncExperiment experiment_sync(std::size_t n_boards, const std::vector<std::int64_t>& phases,
                               WallTime horizon, std::uint64_t seed, std::size_t n_probes) {
  RunConfig cfg = config_with_phases(n_boards, phases, seed);
  cfg.horizon = horizon;
  Network net(cfg);

  SyncExperiment out;
  out.auto_id = run_auto_id(net, cfg.autoid_max_rounds);
  out.report = run_clock_sync(net, 0);

  const ClockDomain nominal = net.board(0).nominal();
  const std::uint64_t e0 = out.report.apply_edge[0];
  const std::uint64_t now_tick = net.board(0).current_edge(net.now()).value_or(e0) - e0;
  const auto last = last_edge_at_or_before(nominal, horizon);
  const std::uint64_t end_tick = last && last->index > e0 ? last->index - e0 : 0;
  if (end_tick <= now_tick + n_probes) throw ConfigError("sync horizon too short for probes");

  // Consecutive WAITT targets must stay inside the 2^47 comparison window.
  const std::uint64_t max_gap = AbsTick48::kHalfRange / 2;
  const std::uint64_t usable = end_tick - now_tick;
  const std::size_t probes = std::max<std::size_t>(n_probes, usable / max_gap + 1);
  std::vector<std::uint64_t> ticks;
  for (std::size_t k = 1; k <= probes; ++k) ticks.push_back(now_tick + usable * k / (probes + 1));
  if (end_tick > AbsTick48::kModulus + 1000) {
    ticks.push_back(AbsTick48::kModulus - 1000);
    ticks.push_back(AbsTick48::kModulus + 1000);
    out.crossed_wrap = true;
  }
  std::sort(ticks.begin(), ticks.end());
  ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
  out.probe_ticks = ticks;

  std::string body;
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    body += "  WAITT " + std::to_string(ticks[i] & AbsTick48::kMask) + "\n";
    body += "  PULSE p" + std::to_string(i) + "\n";
  }
  body += "  HALT\n";
  net.load_program(script::parse_program(program_text(n_boards, body)));
  for (auto u : ticks) net.probe_at(edge_time(nominal, e0 + u));
  net.start_scripts();
  net.run_until(horizon);

  out.stable = true;
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    const WallTime skew = measure_pulse_skew(net.trace(), "p" + std::to_string(i), n_boards);
    out.probe_skews.push_back(skew);
    if (skew != out.report.skew) out.stable = false;
  }

  out.aligned = out.report.aligned;
  std::size_t probe_records = 0;
  std::size_t idx = 0;
  for (const auto& r : net.trace().records()) {
    if (r.ev != TraceEvent::Probe) continue;
    if (r.tick != (ticks[idx / n_boards] & AbsTick48::kMask)) out.aligned = false;
    ++probe_records;
    ++idx;
  }
  if (probe_records != ticks.size() * n_boards) out.aligned = false;
  out.trace = net.trace();
  return out;
}

WrapExperiment experiment_wrap(std::size_t n_boards, const std::vector<std::int64_t>& phases,
                               std::uint64_t seed) {
  RunConfig cfg = config_with_phases(n_boards, phases, seed);
  Network net(cfg);
  run_auto_id(net, cfg.autoid_max_rounds);
  const SyncReport rep = run_clock_sync(net, 0);

  constexpr std::uint64_t kPre = AbsTick48::kModulus - 10;
  constexpr std::uint64_t kPost = 5;
  // 2^48 - 10 seen from tick 0 lies behind us in the comparison window, so
  // step through the midpoint first.
  constexpr std::uint64_t kMid = AbsTick48::kHalfRange - 1;
  net.load_program(script::parse_program(program_text(
      n_boards, "  WAITT " + std::to_string(kMid) + "\n  WAITT " + std::to_string(kPre) +
                    "\n  PULSE pre\n  WAITT " + std::to_string(kPost) +
                    "\n  PULSE post\n  HALT\n")));
  net.start_scripts();
  const ClockDomain nominal = net.board(0).nominal();
  net.run_until(edge_time(nominal, rep.apply_edge[0] + AbsTick48::kModulus + 1000));

  WrapExperiment out;
  out.wrap_period = wrap_horizon(cfg.fabric_clock_hz);
  out.pre_tick.assign(n_boards, 0);
  out.post_tick.assign(n_boards, 0);
  out.pre_edge.assign(n_boards, 0);
  out.post_edge.assign(n_boards, 0);
  std::size_t seen = 0;
  for (const auto& r : net.trace().records()) {
    if (r.ev != TraceEvent::Pulse) continue;
    const auto b = static_cast<std::size_t>(r.board);
    if (r.text == "pre") {
      out.pre_tick[b] = r.tick;
      out.pre_edge[b] = r.edge;
    } else {
      out.post_tick[b] = r.tick;
      out.post_edge[b] = r.edge;
    }
    ++seen;
  }
  out.ok = seen == 2 * n_boards;
  if (out.ok) {
    out.pre_skew = measure_pulse_skew(net.trace(), "pre", n_boards);
    out.post_skew = measure_pulse_skew(net.trace(), "post", n_boards);
    for (std::size_t b = 0; b < n_boards; ++b) {
      out.ok = out.ok && out.pre_tick[b] == kPre && out.post_tick[b] == kPost &&
               out.post_edge[b] - out.pre_edge[b] == 15 &&
               out.pre_edge[b] == rep.apply_edge[b] + kPre;
    }
    out.ok = out.ok && out.pre_skew == out.post_skew && out.pre_skew == rep.skew;
  }
  out.trace = net.trace();
  return out;
}

}  // namespace xcom

// SPDX-License-Identifier: Apache-2.0
//
// xcomsim: command-line front end for the XCOM network simulator.
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "xcom/config.hpp"
#include "xcom/error.hpp"
#include "xcom/experiments.hpp"
#include "xcom/network.hpp"
#include "xcom/sync.hpp"

namespace {

using namespace xcom;
using json = nlohmann::ordered_json;

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string horizon;
};

// Environment variables fill in what the command line left unset.
void apply_env(Common& c) {
  if (!c.seed) {
    if (const char* s = std::getenv("XCOM_SEED"); s && *s) {
      c.seed = static_cast<std::uint64_t>(parse_int128(s));
    }
  }
  if (c.out.empty()) {
    if (const char* s = std::getenv("XCOM_OUT"); s && *s) c.out = s;
  }
}

json fs_value(WallTime t) {
  if (t.fs() >= INT64_MIN && t.fs() <= INT64_MAX) return static_cast<std::int64_t>(t.fs());
  return to_string(t);
}

void write_artifacts(const std::string& dir, const Trace& trace, const std::string& summary) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  std::ofstream t(std::filesystem::path(dir) / "trace.txt", std::ios::binary);
  trace.write(t);
  std::ofstream s(std::filesystem::path(dir) / "summary.json");
  s << summary << '\n';
  if (!t || !s) throw ConfigError("cannot write to output directory '" + dir + "'");
}

Command parse_size(const std::string& text) {
  std::string up;
  for (char c : text) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "D8" || up == "8") return Command::Data8;
  if (up == "D16" || up == "16") return Command::Data16;
  if (up == "D32" || up == "32") return Command::Data32;
  if (auto c = command_from_name(up); c && is_data_command(*c)) return *c;
  throw ConfigError("unknown size class '" + text + "' (expected D8, D16 or D32)");
}

std::vector<std::int64_t> parse_phase_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(static_cast<std::int64_t>(parse_duration(item).fs()));
  }
  return out;
}

int cmd_run(const Common& c, const std::string& config, const std::string& scenario,
            unsigned sweep, unsigned jobs) {
  ScenarioFiles files{config, scenario, c.seed, std::nullopt, c.out};
  if (!c.horizon.empty()) files.horizon = parse_duration(c.horizon);
  if (sweep <= 1) return run_scenario_files(files, std::cerr);

  // Seed sweep: independent engines, one output directory per seed.
  const std::uint64_t first = c.seed.value_or(load_config(config).seed);
  std::vector<std::future<std::pair<int, std::string>>> runs;
  std::vector<int> codes(sweep, kExitOk);
  std::vector<std::string> diags(sweep);
  const unsigned width = std::max(1u, jobs);
  for (unsigned base = 0; base < sweep; base += width) {
    runs.clear();
    for (unsigned i = base; i < std::min(sweep, base + width); ++i) {
      ScenarioFiles f = files;
      f.seed = first + i;
      if (!c.out.empty()) f.out_dir = (std::filesystem::path(c.out) / ("seed-" + std::to_string(first + i))).string();
      runs.push_back(std::async(std::launch::async, [f] {
        std::ostringstream err;
        const int code = run_scenario_files(f, err);
        return std::make_pair(code, err.str());
      }));
    }
    for (unsigned k = 0; k < runs.size(); ++k) {
      auto [code, diag] = runs[k].get();
      codes[base + k] = code;
      diags[base + k] = diag;
    }
  }
  int worst = kExitOk;
  for (unsigned i = 0; i < sweep; ++i) {
    std::cout << "seed " << first + i << ": exit " << codes[i] << '\n';
    std::cerr << diags[i];
    worst = std::max(worst, codes[i]);
  }
  return worst;
}

int cmd_latency(const Common& c, std::size_t boards, const std::string& size, std::uint64_t link_hz,
                std::uint64_t count) {
  const Command cmd = parse_size(size);
  LinkClock lc;
  lc.freq_hz = link_hz;
  if (lc.exceeds_rated()) {
    std::cerr << "warning: link clock " << link_hz << " Hz exceeds the rated "
              << LinkClock::kRatedMaxHz << " Hz\n";
  }
  const auto exp = experiment_latency(boards, cmd, link_hz, count, c.seed.value_or(1));
  const std::string summary = summary_json(exp.summary);
  write_artifacts(c.out, exp.trace, summary);
  std::cout << summary << '\n';
  std::cout << "expected " << to_string(exp.expected) << " fs; "
            << (exp.identical && exp.matches_wire ? "all latencies identical" : "LATENCY DEVIATION")
            << '\n';
  return exp.identical && exp.matches_wire ? kExitOk : kExitRuntime;
}

int cmd_soak(const Common& c, std::vector<std::size_t> boards, std::uint64_t count) {
  if (boards.empty()) boards = {2, 3};
  int code = kExitOk;
  for (auto n : boards) {
    const auto exp = experiment_latency(n, Command::Data32, 107'500'000, count, c.seed.value_or(1));
    const bool ok = exp.identical && exp.matches_wire;
    std::cout << n << " boards: " << exp.summary.latency.count << " messages, latency "
              << to_string(exp.summary.latency.min) << ".." << to_string(exp.summary.latency.max)
              << " fs, variance " << static_cast<double>(exp.summary.latency.variance_fs2())
              << " fs^2, " << exp.summary.runtime_s << " s " << (ok ? "ok" : "FAIL") << '\n';
    if (!c.out.empty()) {
      write_artifacts((std::filesystem::path(c.out) / ("boards-" + std::to_string(n))).string(),
                      exp.trace, summary_json(exp.summary));
    }
    if (!ok) code = kExitRuntime;
  }
  return code;
}

int cmd_sync(const Common& c, std::size_t boards, const std::string& phases, std::int64_t phase_max_fs,
             double days) {
  const std::uint64_t seed = c.seed.value_or(1);
  std::vector<std::int64_t> ph = phases.empty() ? random_phases(seed, boards, phase_max_fs)
                                                : parse_phase_list(phases);
  WallTime horizon = c.horizon.empty()
                         ? WallTime(static_cast<int128>(days * 86400.0 * 1e6) * 1'000'000'000)
                         : parse_duration(c.horizon);
  const auto exp = experiment_sync(boards, ph, horizon, seed);
  json j;
  j["boards"] = boards;
  j["auto_id_rounds"] = exp.auto_id.rounds;
  j["phases_fs"] = ph;
  j["sync_skew_fs"] = fs_value(exp.report.skew);
  j["probes"] = exp.probe_skews.size();
  j["probe_skew_fs"] = json::array();
  for (auto s : exp.probe_skews) j["probe_skew_fs"].push_back(fs_value(s));
  j["crossed_wrap"] = exp.crossed_wrap;
  j["stable"] = exp.stable;
  j["aligned"] = exp.aligned;
  write_artifacts(c.out, exp.trace, j.dump(2));
  std::cout << j.dump(2) << '\n';
  return exp.stable && exp.aligned ? kExitOk : kExitRuntime;
}

int cmd_autoid(const Common& c, std::size_t boards) {
  RunConfig cfg = RunConfig::with_boards(boards);
  cfg.seed = c.seed.value_or(1);
  Network net(cfg);
  const auto res = run_auto_id(net, cfg.autoid_max_rounds);
  bool ok = true;
  for (std::size_t b = 0; b < boards; ++b) {
    std::cout << "board " << b << " -> id " << int(res.ids[b]) << '\n';
    if (res.ids[b] != b) ok = false;
  }
  std::cout << "rounds " << res.rounds << '\n';
  write_artifacts(c.out, net.trace(), summary_json(summarize(net.trace())));
  return ok ? kExitOk : kExitRuntime;
}

int cmd_wraptest(const Common& c, std::size_t boards, std::int64_t phase_max_fs) {
  const auto ph = random_phases(c.seed.value_or(1), boards, phase_max_fs);
  const auto exp = experiment_wrap(boards, ph, c.seed.value_or(1));
  json j;
  j["wrap_period_fs"] = fs_value(exp.wrap_period);
  j["wrap_period_days"] = static_cast<double>(exp.wrap_period.fs()) / 1e15 / 86400.0;
  j["pre_skew_fs"] = fs_value(exp.pre_skew);
  j["post_skew_fs"] = fs_value(exp.post_skew);
  j["pre_tick"] = exp.pre_tick;
  j["post_tick"] = exp.post_tick;
  j["ok"] = exp.ok;
  write_artifacts(c.out, exp.trace, j.dump(2));
  std::cout << j.dump(2) << '\n';
  return exp.ok ? kExitOk : kExitRuntime;
}

void add_common(CLI::App* app, Common& c, bool horizon) {
  app->add_option("--seed", c.seed, "RNG seed (env XCOM_SEED)");
  app->add_option("--out", c.out, "output directory for trace.txt and summary.json (env XCOM_OUT)");
  if (horizon) app->add_option("--horizon", c.horizon, "simulated horizon, e.g. 2ms or 3d");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"XCOM multi-board synchronization and messaging simulator"};
  app.require_subcommand(1);
  Common common;

  std::string config, scenario;
  unsigned sweep = 1, jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* run = app.add_subcommand("run", "run a scenario against a config");
  run->add_option("--config", config, "YAML run configuration")->required();
  run->add_option("--scenario", scenario, "scenario script")->required();
  run->add_option("--sweep", sweep, "run this many consecutive seeds in parallel");
  run->add_option("--jobs", jobs, "parallel runs during a sweep");
  add_common(run, common, true);

  std::size_t boards = 2;
  std::string size = "D32";
  std::uint64_t link_hz = 107'500'000, count = 1000;
  auto* latency = app.add_subcommand("latency", "measure per-message latency");
  latency->add_option("--boards", boards)->check(CLI::Range(1, 15));
  latency->add_option("--size", size, "D8, D16 or D32");
  latency->add_option("--link-hz", link_hz);
  latency->add_option("--count", count);
  add_common(latency, common, false);

  std::vector<std::size_t> soak_boards;
  std::uint64_t soak_count = 100'000;
  auto* soak = app.add_subcommand("soak", "100K DATA32 messages, latency must never vary");
  soak->add_option("--boards", soak_boards, "board counts (default 2 and 3)");
  soak->add_option("--count", soak_count);
  add_common(soak, common, false);

  std::string phases;
  std::int64_t phase_max_fs = 50'000;
  double days = 1.0;
  auto* sync = app.add_subcommand("sync", "AUTO-ID, clock sync and long-horizon skew probes");
  sync->add_option("--boards", boards)->check(CLI::Range(2, 15));
  sync->add_option("--phases", phases, "comma-separated per-board phases, e.g. 0,12ps,-8ps");
  sync->add_option("--phase-max-fs", phase_max_fs, "bound for random phases when --phases is absent");
  sync->add_option("--days", days, "simulated days (ignored with --horizon)");
  add_common(sync, common, true);

  auto* autoid = app.add_subcommand("autoid", "assign board IDs by probe broadcast");
  autoid->add_option("--boards", boards)->check(CLI::Range(1, 15));
  add_common(autoid, common, false);

  auto* wrap = app.add_subcommand("wraptest", "WAITT and pulses across the 48-bit counter wrap");
  wrap->add_option("--boards", boards)->check(CLI::Range(2, 15));
  wrap->add_option("--phase-max-fs", phase_max_fs);
  add_common(wrap, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    apply_env(common);
    if (run->parsed()) return cmd_run(common, config, scenario, sweep, jobs);
    if (latency->parsed()) return cmd_latency(common, boards, size, link_hz, count);
    if (soak->parsed()) return cmd_soak(common, soak_boards, soak_count);
    if (sync->parsed()) return cmd_sync(common, boards, phases, phase_max_fs, days);
    if (autoid->parsed()) return cmd_autoid(common, boards);
    if (wrap->parsed()) return cmd_wraptest(common, boards, phase_max_fs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

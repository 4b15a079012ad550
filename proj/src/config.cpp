// SPDX-License-Identifier: Apache-2.0
#include "xcom/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "xcom/error.hpp"

namespace xcom {
namespace {

const std::set<std::string> kKeys = {
    "boards",         "link_clock_hz", "fabric_clock_hz", "link_delay_fs", "phase_fs",
    "seed",           "horizon_fs",    "fifo_depth",      "tx_queue_depth", "start_edge",
    "auto_id",        "sync_gap_cycles", "autoid_max_rounds",
};

int128 scalar_int(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw ConfigError("'" + key + "' must be a scalar");
  return parse_int128(node.Scalar());
}

std::uint64_t unsigned_value(const YAML::Node& node, const std::string& key) {
  const int128 v = scalar_int(node, key);
  if (v < 0 || v > int128{UINT64_MAX}) throw ConfigError("'" + key + "' out of range");
  return static_cast<std::uint64_t>(v);
}

WallTime duration_value(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw ConfigError("'" + key + "' must be a scalar");
  return parse_duration(node.Scalar());
}

}  // namespace

RunConfig RunConfig::with_boards(std::size_t n) {
  RunConfig cfg;
  cfg.topology = n == 1 ? Topology::single_board() : build_full_mesh(n, WallTime{});
  return cfg;
}

void RunConfig::validate() const {
  if (horizon <= WallTime{}) throw ConfigError("horizon must be positive");
  if (fabric_clock_hz == 0) throw ConfigError("fabric_clock_hz must be positive");
  if (link.freq_hz == 0) throw ConfigError("link_clock_hz must be positive");
  if (fifo_depth == 0 || tx_queue_depth == 0) throw ConfigError("queue depths must be positive");
  if (autoid_max_rounds == 0) throw ConfigError("autoid_max_rounds must be positive");
  if (!start_edge.empty() && start_edge.size() != boards()) {
    throw ConfigError("start_edge needs one entry per board");
  }
  for (std::size_t b = 0; b < boards(); ++b) {
    if (!fabric(b).valid()) {
      throw ConfigError("phase_fs[" + std::to_string(b) + "] must be smaller than one fabric period");
    }
  }
}

RunConfig parse_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError("config must be a key/value mapping");

  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!kKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  const std::size_t n = root["boards"] ? unsigned_value(root["boards"], "boards") : 2;
  cfg.topology = RunConfig::with_boards(n).topology;

  if (auto v = root["seed"]) cfg.seed = unsigned_value(v, "seed");
  if (auto v = root["horizon_fs"]) cfg.horizon = duration_value(v, "horizon_fs");
  if (auto v = root["link_clock_hz"]) cfg.link.freq_hz = unsigned_value(v, "link_clock_hz");
  if (auto v = root["fabric_clock_hz"]) cfg.fabric_clock_hz = unsigned_value(v, "fabric_clock_hz");
  if (auto v = root["fifo_depth"]) cfg.fifo_depth = unsigned_value(v, "fifo_depth");
  if (auto v = root["tx_queue_depth"]) cfg.tx_queue_depth = unsigned_value(v, "tx_queue_depth");
  if (auto v = root["sync_gap_cycles"]) {
    cfg.sync_gap_cycles = static_cast<std::uint32_t>(unsigned_value(v, "sync_gap_cycles"));
  }
  if (auto v = root["autoid_max_rounds"]) {
    cfg.autoid_max_rounds = static_cast<std::uint32_t>(unsigned_value(v, "autoid_max_rounds"));
  }
  if (auto v = root["auto_id"]) {
    try {
      cfg.auto_id = v.as<bool>();
    } catch (const YAML::Exception&) {
      throw ConfigError("'auto_id' must be true or false");
    }
  }

  if (auto v = root["link_delay_fs"]) {
    if (v.IsScalar()) {
      const WallTime d = duration_value(v, "link_delay_fs");
      for (std::size_t src = 0; src < n; ++src)
        for (std::size_t dst = 0; dst < n; ++dst) cfg.topology.set_link_delay(src, dst, d);
    } else if (v.IsSequence() && v.size() == n) {
      for (std::size_t src = 0; src < n; ++src) {
        const auto row = v[src];
        if (!row.IsSequence() || row.size() != n) {
          throw ConfigError("link_delay_fs must be a scalar or a " + std::to_string(n) + "x" +
                            std::to_string(n) + " matrix");
        }
        for (std::size_t dst = 0; dst < n; ++dst) {
          cfg.topology.set_link_delay(src, dst, duration_value(row[dst], "link_delay_fs"));
        }
      }
    } else {
      throw ConfigError("link_delay_fs must be a scalar or a " + std::to_string(n) + "x" +
                        std::to_string(n) + " matrix");
    }
  }

  if (auto v = root["phase_fs"]) {
    if (!v.IsSequence() || v.size() != n) throw ConfigError("phase_fs needs one entry per board");
    for (std::size_t b = 0; b < n; ++b) {
      const WallTime p = duration_value(v[b], "phase_fs");
      if (p.fs() > INT64_MAX || p.fs() < INT64_MIN) throw ConfigError("phase_fs out of range");
      cfg.topology.set_phase(b, static_cast<std::int64_t>(p.fs()));
    }
  }

  if (auto v = root["start_edge"]) {
    if (!v.IsSequence()) throw ConfigError("start_edge must be a list");
    for (const auto& e : v) cfg.start_edge.push_back(unsigned_value(e, "start_edge"));
  }

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace xcom

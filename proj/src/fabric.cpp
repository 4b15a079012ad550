// SPDX-License-Identifier: Apache-2.0
#include "xcom/fabric.hpp"

#include <algorithm>
#include <string>

#include "xcom/error.hpp"

namespace xcom {

Topology::Topology(std::size_t n, WallTime delay)
    : n_(n), delay_fs_(n * n, delay), phase_fs_(n, 0) {
  if (delay < WallTime{}) throw ConfigError("link delay must be non-negative");
}

Topology Topology::single_board(WallTime loopback_delay) { return Topology(1, loopback_delay); }

Topology build_full_mesh(std::size_t n, WallTime default_delay) {
  if (n < 2 || n > kMaxBoards) {
    throw ConfigError("board count " + std::to_string(n) + " outside [2, " +
                      std::to_string(kMaxBoards) + "]");
  }
  return Topology(n, default_delay);
}

void Topology::check_index(std::size_t i, const char* what) const {
  if (i >= n_) {
    throw ConfigError(std::string(what) + " index " + std::to_string(i) + " out of range for " +
                      std::to_string(n_) + " boards");
  }
}

WallTime Topology::delay(std::size_t src, std::size_t dst) const {
  check_index(src, "source");
  check_index(dst, "destination");
  return delay_fs_[src * n_ + dst];
}

std::int64_t Topology::phase(std::size_t board) const {
  check_index(board, "board");
  return phase_fs_[board];
}

void Topology::set_link_delay(std::size_t src, std::size_t dst, WallTime delay) {
  check_index(src, "source");
  check_index(dst, "destination");
  if (delay < WallTime{}) throw ConfigError("link delay must be non-negative");
  delay_fs_[src * n_ + dst] = delay;
}

void Topology::set_phase(std::size_t board, std::int64_t phase_fs) {
  check_index(board, "board");
  phase_fs_[board] = phase_fs;
}

bool Topology::matched() const {
  return std::all_of(delay_fs_.begin(), delay_fs_.end(),
                     [&](WallTime d) { return d == delay_fs_.front(); });
}

WallTime serialization_latency(const Transmission& what, const LinkClock& clk) {
  if (const auto* f = std::get_if<Frame>(&what)) return frame_latency(f->cmd, clk);
  return flag_latency(clk);
}

std::vector<Delivery> schedule_transmission(const Topology& topo, std::size_t src,
                                            const Transmission& what, WallTime t_start,
                                            const LinkClock& clk) {
  const WallTime t_out = t_start + serialization_latency(what, clk);
  std::vector<Delivery> out;
  out.reserve(topo.size());
  for (std::size_t dst = 0; dst < topo.size(); ++dst) {
    out.push_back({dst, src, what, t_out + topo.delay(src, dst)});
  }
  return out;
}

}  // namespace xcom

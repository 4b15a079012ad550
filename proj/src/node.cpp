// SPDX-License-Identifier: Apache-2.0
#include "xcom/node.hpp"

#include <algorithm>
#include <string>

#include "xcom/error.hpp"

namespace xcom {

ClockCommandEffect clock_effect_for(Command cmd, const ClockDomain& fabric, WallTime delivered) {
  const ClockDomain nominal{fabric.freq_hz, 0};
  const Edge latch = next_edge_at_or_after(nominal, delivered + nominal.period());
  return {cmd, latch.index, edge_time(fabric, latch.index), latch.time};
}

BoardNode::BoardNode(const Params& p)
    : index_(p.index),
      fabric_(p.fabric),
      link_(p.link),
      fifo_depth_(p.fifo_depth),
      tx_queue_depth_(p.tx_queue_depth),
      rx_last_(p.n_ports),
      rx_fifo_(p.n_ports),
      probe_seen_(p.n_ports),
      flag_in_(p.n_ports, false) {
  if (!fabric_.valid()) throw ConfigError("board fabric clock invalid (|phase| must be < period)");
  if (fifo_depth_ == 0 || tx_queue_depth_ == 0) throw ConfigError("queue depths must be positive");
}

std::optional<WallTime> BoardNode::enqueue_send(const Frame& frame, WallTime t_now,
                                                WallTime not_before) {
  if (!id_ && frame.cmd != Command::AutoIdProbe) {
    throw ProtocolError("board " + std::to_string(index_) + " has no XCOM ID");
  }
  while (!tx_inflight_.empty() && tx_inflight_.front() <= t_now) tx_inflight_.pop_front();
  if (tx_inflight_.size() >= tx_queue_depth_) return std::nullopt;

  const WallTime start = std::max({t_now, not_before, tx_busy_until_});
  tx_busy_until_ = start + frame_latency(frame.cmd, link_);
  tx_inflight_.push_back(tx_busy_until_);
  return start;
}

std::size_t BoardNode::tx_pending(WallTime t_now) const {
  return static_cast<std::size_t>(std::count_if(tx_inflight_.begin(), tx_inflight_.end(),
                                                [&](WallTime end) { return end > t_now; }));
}

RxOutcome BoardNode::on_delivery(std::size_t port, const Frame& frame, WallTime t) {
  if (port >= n_ports()) throw InternalFault("delivery on nonexistent port");
  RxOutcome out;
  const bool addressed = frame.dst == kBroadcastAddr || (id_ && frame.dst == *id_);
  if (!addressed) return out;

  if (frame.cmd == Command::AutoIdProbe) {
    probe_seen_[port] = static_cast<std::uint16_t>(frame.payload);
    out.disposition = RxDisposition::Probe;
  } else if (is_clock_command(frame.cmd)) {
    out.disposition = RxDisposition::Clock;
    out.effect = clock_effect_for(frame.cmd, fabric_, t);
  } else if (is_data_command(frame.cmd)) {
    out.disposition = RxDisposition::Stored;
    rx_last_[port] = frame;
    auto& fifo = rx_fifo_[port];
    if (fifo.size() >= fifo_depth_) {
      out.dropped = fifo.front();
      fifo.pop_front();
      ++overflow_count_;
    }
    fifo.push_back(frame);
  } else {
    // NOP: addressed but carries nothing to store.
    out.disposition = RxDisposition::Stored;
  }
  return out;
}

std::optional<Frame> BoardNode::pop_rx(std::size_t port) {
  auto& fifo = rx_fifo_.at(port);
  if (fifo.empty()) return std::nullopt;
  Frame f = fifo.front();
  fifo.pop_front();
  return f;
}

std::optional<std::pair<std::size_t, Frame>> BoardNode::pop_rx_any() {
  for (std::size_t p = 0; p < rx_fifo_.size(); ++p) {
    if (auto f = pop_rx(p)) return std::pair{p, *f};
  }
  return std::nullopt;
}

void BoardNode::clear_probes() {
  std::fill(probe_seen_.begin(), probe_seen_.end(), std::nullopt);
}

std::optional<std::uint64_t> BoardNode::current_edge(WallTime t) const {
  const auto e = last_edge_at_or_before(nominal(), t);
  if (!e) return std::nullopt;
  return e->index;
}

AbsTick48 BoardNode::read_abs_clock(WallTime t) const {
  if (!clock_.running) return clock_.base;
  const auto edge = current_edge(t);
  if (!edge || *edge < clock_.start_edge) return clock_.base;
  return tick_add(clock_.base, *edge - clock_.start_edge);
}

ClockApplyResult BoardNode::apply_clock_command(const ClockCommandEffect& effect) {
  switch (effect.cmd) {
    case Command::ClkReset:
      clock_ = ClockState{false, 0, AbsTick48{}};
      break;
    case Command::ClkStart:
      if (clock_.running) return ClockApplyResult::StartIgnored;
      clock_.running = true;
      clock_.start_edge = effect.apply_edge;
      break;
    case Command::ClkStop:
      if (clock_.running) {
        const std::uint64_t elapsed =
            effect.apply_edge >= clock_.start_edge ? effect.apply_edge - clock_.start_edge : 0;
        clock_.base = tick_add(clock_.base, elapsed);
        clock_.running = false;
      }
      break;
    default:
      throw InternalFault("non-clock command applied as clock effect");
  }
  return ClockApplyResult::Applied;
}

std::optional<WallTime> BoardNode::set_flag(bool level, WallTime t) {
  if (level == flag_out_) return std::nullopt;
  flag_out_ = level;
  const WallTime start = std::max(t, flag_busy_until_);
  flag_busy_until_ = start + flag_latency(link_);
  return start;
}

}  // namespace xcom

// SPDX-License-Identifier: Apache-2.0
//
// Discrete-event kernel. Events execute in (time, insertion sequence) order;
// equal timestamps are FIFO. Clock values are never ticked: boards compute
// them on demand from edge arithmetic, so cost is O(events) regardless of
// the simulated horizon.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_map>
#include <variant>
#include <vector>

#include "xcom/node.hpp"
#include "xcom/time_core.hpp"
#include "xcom/trace.hpp"
#include "xcom/wire.hpp"

namespace xcom {

struct TxStartEv {
  std::size_t board;
  std::uint64_t msg;
  Frame frame;
};
struct TxEndEv {
  std::size_t board;
  std::uint64_t msg;
};
struct DeliveryEv {
  std::size_t board;
  std::size_t port;
  std::uint64_t msg;
  Frame frame;
};
struct FlagDeliveryEv {
  std::size_t board;
  std::size_t port;
  bool level;
};
struct ClkApplyEv {
  std::size_t board;
  std::uint64_t msg;
  ClockCommandEffect effect;
};
struct ScriptWakeEv {
  std::size_t board;
  std::uint64_t gen;
};
/// Deferred enqueue of a frame on a board's channel.
struct SendEv {
  std::size_t board;
  Frame frame;
};
/// Samples every board's absolute clock into the trace.
struct ProbeEv {
  std::uint64_t id;
};

using EventBody = std::variant<TxStartEv, TxEndEv, DeliveryEv, FlagDeliveryEv, ClkApplyEv,
                               ScriptWakeEv, SendEv, ProbeEv>;

struct Event {
  WallTime t;
  std::uint64_t seq;
  EventBody body;
};

class Dispatcher {
 public:
  virtual ~Dispatcher() = default;
  virtual void dispatch(const Event& ev) = 0;
};

/// Counter-based generator: a pure function of (seed, stream, index).
std::uint64_t counter_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

class Engine {
 public:
  explicit Engine(std::uint64_t seed = 0) : seed_(seed) {}

  WallTime now() const { return now_; }
  std::uint64_t seed() const { return seed_; }

  /// Throws InternalFault if t precedes the current time.
  void schedule(WallTime t, EventBody body);

  bool idle() const { return queue_.empty(); }
  std::size_t pending() const { return queue_.size(); }
  std::uint64_t executed() const { return executed_; }

  /// Runs events with t <= horizon. Later events stay queued.
  void run_until(WallTime horizon, Dispatcher& dispatcher);
  /// Runs until the queue drains.
  void run_to_idle(Dispatcher& dispatcher);

  /// Next value of a per-stream sequence, masked to `width` bits (1..64).
  std::uint64_t rng_draw(std::uint64_t stream, unsigned width);

  Trace& trace() { return trace_; }
  const Trace& trace() const { return trace_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.t != b.t ? a.t > b.t : a.seq > b.seq;
    }
  };

  std::uint64_t seed_;
  WallTime now_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t executed_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::unordered_map<std::uint64_t, std::uint64_t> rng_counters_;
  Trace trace_;
};

}  // namespace xcom

// SPDX-License-Identifier: Apache-2.0
#include "xcom/engine.hpp"

#include "xcom/error.hpp"

namespace xcom {
namespace {

// splitmix64 finalizer.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t counter_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t z = mix(seed);
  z = mix(z ^ (stream * 0xD1B54A32D192ED03ULL));
  return mix(z ^ (index * 0xABC98388FB8FAC03ULL));
}

void Engine::schedule(WallTime t, EventBody body) {
  if (t < now_) {
    throw InternalFault("retro-causal event at t=" + to_string(t) + " (now " + to_string(now_) +
                        ")");
  }
  queue_.push(Event{t, next_seq_++, std::move(body)});
}

void Engine::run_until(WallTime horizon, Dispatcher& dispatcher) {
  while (!queue_.empty() && queue_.top().t <= horizon) {
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.t;
    ++executed_;
    dispatcher.dispatch(ev);
  }
}

void Engine::run_to_idle(Dispatcher& dispatcher) {
  constexpr int128 kForever = static_cast<int128>(~uint128{0} >> 1);
  run_until(WallTime(kForever), dispatcher);
}

std::uint64_t Engine::rng_draw(std::uint64_t stream, unsigned width) {
  const std::uint64_t index = rng_counters_[stream]++;
  const std::uint64_t v = counter_rng(seed_, stream, index);
  return width >= 64 ? v : v & ((std::uint64_t{1} << width) - 1);
}

}  // namespace xcom

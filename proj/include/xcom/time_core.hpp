// SPDX-License-Identifier: Apache-2.0
//
// Exact integer time arithmetic. All physical time is carried in signed
// 128-bit femtoseconds; no floating point is used anywhere in this header.
#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <optional>

namespace xcom {

using int128 = __int128;
using uint128 = unsigned __int128;

inline constexpr int128 kFsPerSecond = 1'000'000'000'000'000;

/// Instant (or duration) of simulated wall-clock time in femtoseconds.
class WallTime {
 public:
  constexpr WallTime() = default;
  constexpr explicit WallTime(int128 fs) : fs_(fs) {}

  static constexpr WallTime from_ps(int128 ps) { return WallTime(ps * 1'000); }
  static constexpr WallTime from_ns(int128 ns) { return WallTime(ns * 1'000'000); }
  static constexpr WallTime from_us(int128 us) { return WallTime(us * 1'000'000'000); }
  static constexpr WallTime from_seconds(int128 s) { return WallTime(s * kFsPerSecond); }

  constexpr int128 fs() const { return fs_; }

  constexpr WallTime& operator+=(WallTime d) {
    fs_ += d.fs_;
    return *this;
  }
  constexpr WallTime& operator-=(WallTime d) {
    fs_ -= d.fs_;
    return *this;
  }
  friend constexpr WallTime operator+(WallTime a, WallTime b) { return WallTime(a.fs_ + b.fs_); }
  friend constexpr WallTime operator-(WallTime a, WallTime b) { return WallTime(a.fs_ - b.fs_); }
  friend constexpr bool operator==(WallTime a, WallTime b) { return a.fs_ == b.fs_; }
  friend constexpr std::strong_ordering operator<=>(WallTime a, WallTime b) {
    return a.fs_ < b.fs_ ? std::strong_ordering::less
           : a.fs_ > b.fs_ ? std::strong_ordering::greater
                           : std::strong_ordering::equal;
  }

 private:
  int128 fs_ = 0;
};

/// A board's fabric (or any) clock: integer frequency plus a static analog
/// phase offset. The phase houses all residual ZDM/MTS misalignment.
struct ClockDomain {
  std::uint64_t freq_hz = 430'000'000;
  std::int64_t phase_fs = 0;

  /// Integer period, floor(1e15 / freq).
  constexpr WallTime period() const { return WallTime(kFsPerSecond / freq_hz); }
  bool valid() const;
};

/// Value of a 48-bit absolute clock counter. Arithmetic is mod 2^48.
class AbsTick48 {
 public:
  static constexpr std::uint64_t kModulus = std::uint64_t{1} << 48;
  static constexpr std::uint64_t kMask = kModulus - 1;
  static constexpr std::uint64_t kHalfRange = std::uint64_t{1} << 47;

  constexpr AbsTick48() = default;
  constexpr explicit AbsTick48(std::uint64_t v) : value_(v & kMask) {}

  constexpr std::uint64_t value() const { return value_; }
  friend constexpr bool operator==(AbsTick48, AbsTick48) = default;

 private:
  std::uint64_t value_ = 0;
};

WallTime edge_time(const ClockDomain& domain, std::uint64_t k);

struct Edge {
  std::uint64_t index;
  WallTime time;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Smallest edge with edge_time >= t. Requires t >= phase.
Edge next_edge_at_or_after(const ClockDomain& domain, WallTime t);

/// Largest edge with edge_time <= t; empty when t precedes edge 0.
std::optional<Edge> last_edge_at_or_before(const ClockDomain& domain, WallTime t);

AbsTick48 tick_add(AbsTick48 a, std::uint64_t d);

/// Windowed modular order: true iff (b - a) mod 2^48 lies in (0, 2^47).
bool tick_before(AbsTick48 a, AbsTick48 b);

/// (b - a) mod 2^48.
std::uint64_t tick_distance(AbsTick48 a, AbsTick48 b);

/// Wall time for 2^48 edges of a clock at freq_hz.
WallTime wrap_horizon(std::uint64_t freq_hz);

std::string to_string(int128 v);
std::string to_string(WallTime t);

/// Parses a signed integer that may exceed 64 bits. Throws ConfigError.
int128 parse_int128(const std::string& text);

/// Parses an integer duration with optional unit suffix (fs, ps, ns, us, ms,
/// s, d), e.g. "20ps" or "3d". Bare integers are femtoseconds.
WallTime parse_duration(const std::string& text);

}  // namespace xcom

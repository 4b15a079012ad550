// SPDX-License-Identifier: Apache-2.0
#include "xcom/time_core.hpp"

#include <algorithm>
#include <cctype>

#include "xcom/error.hpp"

namespace xcom {

bool ClockDomain::valid() const {
  if (freq_hz == 0) return false;
  const int128 mag = phase_fs < 0 ? -int128{phase_fs} : int128{phase_fs};
  return mag < period().fs();
}

WallTime edge_time(const ClockDomain& domain, std::uint64_t k) {
  return WallTime(int128{domain.phase_fs} + int128{k} * kFsPerSecond / domain.freq_hz);
}

Edge next_edge_at_or_after(const ClockDomain& domain, WallTime t) {
  const int128 u = t.fs() - domain.phase_fs;
  if (u <= 0) return {0, edge_time(domain, 0)};
  // floor(k P / f) >= u  <=>  k >= u f / P
  const int128 num = u * domain.freq_hz;
  const auto k = static_cast<std::uint64_t>((num + kFsPerSecond - 1) / kFsPerSecond);
  return {k, edge_time(domain, k)};
}

std::optional<Edge> last_edge_at_or_before(const ClockDomain& domain, WallTime t) {
  const int128 u = t.fs() - domain.phase_fs;
  if (u < 0) return std::nullopt;
  // floor(j P / f) <= u  <=>  j P <= (u + 1) f - 1
  const auto j = static_cast<std::uint64_t>(((u + 1) * domain.freq_hz - 1) / kFsPerSecond);
  return Edge{j, edge_time(domain, j)};
}

AbsTick48 tick_add(AbsTick48 a, std::uint64_t d) {
  // 2^48 divides 2^64, so wrapping uint64 addition followed by masking is exact.
  return AbsTick48(a.value() + d);
}

std::uint64_t tick_distance(AbsTick48 a, AbsTick48 b) {
  return (b.value() - a.value()) & AbsTick48::kMask;
}

bool tick_before(AbsTick48 a, AbsTick48 b) {
  const std::uint64_t d = tick_distance(a, b);
  return d > 0 && d < AbsTick48::kHalfRange;
}

WallTime wrap_horizon(std::uint64_t freq_hz) {
  return WallTime(int128{AbsTick48::kModulus} * kFsPerSecond / freq_hz);
}

std::string to_string(int128 v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  uint128 mag = neg ? uint128(-(v + 1)) + 1 : uint128(v);
  std::string out;
  while (mag != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(mag % 10)));
    mag /= 10;
  }
  if (neg) out.push_back('-');
  std::reverse(out.begin(), out.end());
  return out;
}

std::string to_string(WallTime t) { return to_string(t.fs()); }

int128 parse_int128(const std::string& text) {
  std::size_t i = 0;
  bool neg = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
    neg = text[i] == '-';
    ++i;
  }
  if (i == text.size()) throw ConfigError("expected integer, got '" + text + "'");
  int base = 10;
  if (text.size() - i > 2 && text[i] == '0' && (text[i + 1] == 'x' || text[i + 1] == 'X')) {
    base = 16;
    i += 2;
  }
  uint128 acc = 0;
  const uint128 limit = uint128(1) << 126;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '_' || c == '\'') continue;
    int digit;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = c - '0';
    } else if (base == 16 && std::isxdigit(static_cast<unsigned char>(c))) {
      digit = std::tolower(static_cast<unsigned char>(c)) - 'a' + 10;
    } else {
      throw ConfigError("expected integer, got '" + text + "'");
    }
    acc = acc * base + digit;
    if (acc > limit) throw ConfigError("integer out of range: '" + text + "'");
  }
  const auto v = static_cast<int128>(acc);
  return neg ? -v : v;
}

WallTime parse_duration(const std::string& text) {
  struct Unit {
    const char* suffix;
    int128 scale;
  };
  static constexpr Unit kUnits[] = {
      {"fs", 1},
      {"ps", 1'000},
      {"ns", 1'000'000},
      {"us", 1'000'000'000},
      {"ms", 1'000'000'000'000},
      {"s", kFsPerSecond},
      {"d", kFsPerSecond * 86'400},
  };
  if (text.rfind("0x", 0) == 0 || text.rfind("0X", 0) == 0) return WallTime(parse_int128(text));
  for (const auto& unit : kUnits) {
    const std::string suffix = unit.suffix;
    if (text.size() > suffix.size() &&
        text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0 &&
        std::isdigit(static_cast<unsigned char>(text[text.size() - suffix.size() - 1]))) {
      return WallTime(parse_int128(text.substr(0, text.size() - suffix.size())) * unit.scale);
    }
  }
  return WallTime(parse_int128(text));
}

}  // namespace xcom

// SPDX-License-Identifier: Apache-2.0
//
// XCOM frame layout and the DDR link-latency model.
//
// A frame is a 4-bit destination address, a 4-bit command, then a payload
// whose width is fixed by the command. All fields go out MSB-first, address
// nibble first. See docs/protocol.md for the reference table.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xcom/time_core.hpp"

namespace xcom {

enum class Command : std::uint8_t {
  Nop = 0x0,
  AutoIdProbe = 0x1,
  ClkReset = 0x2,
  ClkStart = 0x3,
  ClkStop = 0x4,
  Data8 = 0x5,
  Data16 = 0x6,
  Data32 = 0x7,
};

inline constexpr std::uint8_t kBroadcastAddr = 0xF;
inline constexpr std::uint8_t kMaxUnicastAddr = 0xE;

/// Maps a raw nibble to a command. Codes 0x8-0xF are reserved (nullopt).
std::optional<Command> command_from_code(std::uint8_t code);
std::string_view command_name(Command cmd);
std::optional<Command> command_from_name(std::string_view name);

/// Payload width in bits. Throws WireError(InvalidCommand) for reserved codes.
unsigned payload_width(Command cmd);
unsigned frame_bit_length(Command cmd);

inline bool is_clock_command(Command cmd) {
  return cmd == Command::ClkReset || cmd == Command::ClkStart || cmd == Command::ClkStop;
}
inline bool is_data_command(Command cmd) {
  return cmd == Command::Data8 || cmd == Command::Data16 || cmd == Command::Data32;
}

struct Frame {
  std::uint8_t dst = kBroadcastAddr;
  Command cmd = Command::Nop;
  std::uint32_t payload = 0;

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Bits in transmission order; element 0 goes out first.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}

  /// Builds from a string of '0'/'1'; spaces and underscores are ignored.
  static BitVector from_string(std::string_view text);

  std::size_t size() const { return bits_.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::string to_string() const;

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

BitVector encode_frame(const Frame& f);
Frame decode_frame(const BitVector& b);

/// Source-synchronous link clock. Data is sampled on both edges.
struct LinkClock {
  static constexpr std::uint64_t kDefaultHz = 107'500'000;
  static constexpr std::uint64_t kRatedMaxHz = 312'900'000;

  std::uint64_t freq_hz = kDefaultHz;

  WallTime period() const { return WallTime(kFsPerSecond / freq_hz); }
  bool exceeds_rated() const { return freq_hz > kRatedMaxHz; }
};

/// ceil(bits / 2) link cycles, floor-converted to femtoseconds.
WallTime frame_latency(Command cmd, const LinkClock& clk);

/// One link cycle: the out-of-band flag line toggles once per cycle at most.
WallTime flag_latency(const LinkClock& clk);

std::string to_string(const Frame& f);

}  // namespace xcom

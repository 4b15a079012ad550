// SPDX-License-Identifier: Apache-2.0
#include "xcom/wire.hpp"

#include <array>
#include <cstdio>

#include "xcom/error.hpp"

namespace xcom {
namespace {

struct CommandInfo {
  Command cmd;
  std::string_view name;
  unsigned width;
};

constexpr std::array<CommandInfo, 8> kCommands = {{
    {Command::Nop, "NOP", 0},
    {Command::AutoIdProbe, "AUTOID_PROBE", 16},
    {Command::ClkReset, "CLK_RESET", 0},
    {Command::ClkStart, "CLK_START", 0},
    {Command::ClkStop, "CLK_STOP", 0},
    {Command::Data8, "DATA8", 8},
    {Command::Data16, "DATA16", 16},
    {Command::Data32, "DATA32", 32},
}};

const CommandInfo& info(Command cmd) {
  const auto code = static_cast<std::uint8_t>(cmd);
  if (code >= kCommands.size()) {
    throw WireError(WireError::Kind::InvalidCommand,
                    "reserved command code " + std::to_string(code));
  }
  return kCommands[code];
}

void push_bits(std::vector<std::uint8_t>& out, std::uint32_t value, unsigned width) {
  for (unsigned i = width; i-- > 0;) out.push_back(static_cast<std::uint8_t>((value >> i) & 1U));
}

std::uint32_t read_bits(const BitVector& b, std::size_t pos, unsigned width) {
  std::uint32_t v = 0;
  for (unsigned i = 0; i < width; ++i) v = (v << 1) | b[pos + i];
  return v;
}

}  // namespace

std::optional<Command> command_from_code(std::uint8_t code) {
  if (code >= kCommands.size()) return std::nullopt;
  return kCommands[code].cmd;
}

std::string_view command_name(Command cmd) {
  const auto code = static_cast<std::uint8_t>(cmd);
  return code < kCommands.size() ? kCommands[code].name : std::string_view("RESERVED");
}

std::optional<Command> command_from_name(std::string_view name) {
  for (const auto& c : kCommands)
    if (c.name == name) return c.cmd;
  return std::nullopt;
}

unsigned payload_width(Command cmd) { return info(cmd).width; }

unsigned frame_bit_length(Command cmd) { return 8 + payload_width(cmd); }

BitVector BitVector::from_string(std::string_view text) {
  std::vector<std::uint8_t> bits;
  for (char c : text) {
    if (c == '0' || c == '1') {
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    } else if (c != ' ' && c != '_') {
      throw WireError(WireError::Kind::MalformedFrame, "bad bit character");
    }
  }
  return BitVector(std::move(bits));
}

std::string BitVector::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

BitVector encode_frame(const Frame& f) {
  const unsigned width = payload_width(f.cmd);
  if (f.dst > 0xF) throw WireError(WireError::Kind::Encoding, "destination exceeds 4 bits");
  if (width < 32 && (f.payload >> width) != 0) {
    throw WireError(WireError::Kind::Encoding, "payload exceeds " + std::to_string(width) +
                                                   "-bit field of " +
                                                   std::string(command_name(f.cmd)));
  }
  std::vector<std::uint8_t> bits;
  bits.reserve(8 + width);
  push_bits(bits, f.dst, 4);
  push_bits(bits, static_cast<std::uint8_t>(f.cmd), 4);
  push_bits(bits, f.payload, width);
  return BitVector(std::move(bits));
}

Frame decode_frame(const BitVector& b) {
  const std::size_t n = b.size();
  if (n != 8 && n != 16 && n != 24 && n != 40) {
    throw WireError(WireError::Kind::MalformedFrame,
                    "frame length " + std::to_string(n) + " is not 8/16/24/40");
  }
  for (auto bit : b.bits())
    if (bit > 1) throw WireError(WireError::Kind::MalformedFrame, "non-binary element");

  Frame f;
  f.dst = static_cast<std::uint8_t>(read_bits(b, 0, 4));
  const auto code = static_cast<std::uint8_t>(read_bits(b, 4, 4));
  const auto cmd = command_from_code(code);
  if (!cmd) {
    throw WireError(WireError::Kind::InvalidCommand,
                    "reserved command code " + std::to_string(code));
  }
  f.cmd = *cmd;
  const unsigned width = payload_width(f.cmd);
  if (n != 8 + width) {
    throw WireError(WireError::Kind::MalformedFrame,
                    std::string(command_name(f.cmd)) + " needs " + std::to_string(8 + width) +
                        " bits, got " + std::to_string(n));
  }
  f.payload = read_bits(b, 8, width);
  return f;
}

WallTime frame_latency(Command cmd, const LinkClock& clk) {
  const int128 cycles = (frame_bit_length(cmd) + 1) / 2;
  return WallTime(cycles * kFsPerSecond / clk.freq_hz);
}

WallTime flag_latency(const LinkClock& clk) { return clk.period(); }

std::string to_string(const Frame& f) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "dst=0x%X cmd=%s payload=0x%X", f.dst,
                std::string(command_name(f.cmd)).c_str(), f.payload);
  return buf;
}

}  // namespace xcom

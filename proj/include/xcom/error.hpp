// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xcom {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration or topology parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class WireError : public Error {
 public:
  enum class Kind { InvalidCommand, MalformedFrame, Encoding };

  WireError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Scenario text rejected by the parser. Carries the 1-based source line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Network procedure failure: AUTO-ID exhaustion, refused sync, missing pulses.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Broken engine invariant (e.g. retro-causal scheduling). Aborts the run.
class InternalFault : public Error {
 public:
  using Error::Error;
};

}  // namespace xcom

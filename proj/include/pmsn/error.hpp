#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pmsn {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A computation produced non-finite values or an iterative method failed.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

/// Backward pass invoked on a tape that lacks the tensors it needs.
class InvalidState : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t byte_offset)
      : Error(what + " (at byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::uint64_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::uint64_t byte_offset_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key = {}, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        key_(std::move(key)),
        line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pmsn

#pragma once

#include <stdexcept>
#include <string>

namespace scorecheck {

enum class ErrorKind { parameter, capability, numeric, io, parse };

/// Base of every exception thrown by the library. The C API maps `kind()` onto
/// its status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Invalid or out-of-range argument.
class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error(ErrorKind::parameter, what) {}
};

/// Request is well-formed but outside what the implementation supports
/// (e.g. exact normalisation above the summation cap).
class CapabilityError : public Error {
 public:
  explicit CapabilityError(const std::string& what) : Error(ErrorKind::capability, what) {}
};

/// A numerical evaluation produced a non-finite value.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// Malformed input text; the message carries line information where known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

}  // namespace scorecheck

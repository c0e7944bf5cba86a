#pragma once

#include <stdexcept>
#include <string>

namespace pnn {

// Base class for all library errors. Bad label indices surface as
// std::out_of_range instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file contents (bad magic, truncated payloads, CRC mismatch).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Inputs that disagree with each other (count mismatch, wrong dimension).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// Parameters that describe an impossible task or system.
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

// Rejected experiment configuration; carries the offending field.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg, std::string field = {})
      : Error(msg), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// A physical backend failed to produce an answer (remote I/O, protocol).
class BackendError : public Error {
 public:
  using Error::Error;
};

// Operation not defined for this backend, e.g. gradients of a remote system.
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

// Non-finite loss, divergence, rank-deficient fits.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace pnn

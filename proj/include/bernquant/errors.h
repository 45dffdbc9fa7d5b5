#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bernquant {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or input outside the admissible domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed configuration, sample file or command-line value.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Coefficient tensor reached sup-norm >= 1; a one-bit quantizer cannot
// track it.
class CoefficientOverflow : public Error {
 public:
  CoefficientOverflow(const std::string& what, double norm)
      : Error(what), norm_(norm) {}
  double norm() const { return norm_; }

 private:
  double norm_;
};

// The sigma-delta state left the configured bound. `fiber` is the
// lexicographic index of the offending fiber (0 for 1-D runs) and `step`
// the position along the scan direction.
class StabilityOverflow : public Error {
 public:
  StabilityOverflow(const std::string& what, std::size_t fiber,
                    std::size_t step, double value)
      : Error(what), fiber_(fiber), step_(step), value_(value) {}
  std::size_t fiber() const { return fiber_; }
  std::size_t step() const { return step_; }
  double value() const { return value_; }

 private:
  std::size_t fiber_;
  std::size_t step_;
  double value_;
};

// A weight or bias that is not a level of the declared alphabet.
class AlphabetViolation : public Error {
 public:
  using Error::Error;
};

// Structural problems in a network: cycles, dangling edges, bad layers.
class GraphError : public Error {
 public:
  using Error::Error;
};

// Corrupted or incompatible serialized data.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A construction would exceed a configured size cap.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

}  // namespace bernquant

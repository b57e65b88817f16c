#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qas {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Qubit counts, tensor dimensions or enumeration caps out of range.
class SizeError : public Error {
    using Error::Error;
};

/// Duplicate or out-of-range gate wires.
class WiringError : public Error {
    using Error::Error;
};

/// Parameter tensor does not match the pool/layout it is used with.
class ParameterError : public Error {
    using Error::Error;
};

class BoundsError : public Error {
    using Error::Error;
};

/// A loss, reward or gradient became NaN or infinite.
class NumericError : public Error {
    using Error::Error;
};

/// Invalid user configuration. Carries a 1-based line number when known.
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string &msg, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// Operation invoked on a search state that does not admit it.
class StateError : public Error {
    using Error::Error;
};

class GraphError : public Error {
    using Error::Error;
};

/// Singular linear system or vanishing normalisation.
class DegenerateError : public Error {
    using Error::Error;
};

/// A tree node has no admissible action left.
class DeadEndError : public Error {
    using Error::Error;
};

} // namespace qas

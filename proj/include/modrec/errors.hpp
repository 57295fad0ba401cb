#pragma once

#include <stdexcept>
#include <string>

namespace modrec {

// Bad caller input: non-positive thresholds, mismatched shapes, sub-Nyquist rates.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The sampling window does not reach the quiet tails of the signal.
class WindowTooSmall : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An oversampling factor of one or less leaves no out-of-band region.
class EmptyBand : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A quantity that must hold by construction did not (off-lattice residual,
// non-real adjoint of a symmetric spectrum).
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Iterative solver produced a non-finite cost.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace modrec

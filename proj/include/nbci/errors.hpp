#pragma once

#include <stdexcept>
#include <string>

namespace nbci {

/// Bad argument to a library call: out-of-range parameter, dimension
/// mismatch, non-partition channel blocks, and the like.
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed input data: unreadable files, bad headers, channel-count
/// mismatches. Messages name the offending file/line/field where known.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver failed to converge within its cap. Carries the
/// residual (direction change, KKT violation) at the point of failure.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Wire-format violation: bad magic, version, type, CRC, or a truncated
/// datagram. The message names the offending field.
class ProtocolError : public std::runtime_error {
public:
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

/// Fault on the live sample stream (channel dropout, inconsistent frame).
class StreamError : public std::runtime_error {
public:
    explicit StreamError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nbci

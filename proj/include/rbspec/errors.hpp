#pragma once

#include <stdexcept>
#include <string>

namespace rbspec {

// Base class for all library errors so callers can catch everything in one arm.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input value outside a documented validity window (temperatures, detuning
// grids, geometry). Carries the offending value and the accepted interval.
class RangeError : public Error {
public:
    RangeError(const std::string& msg, double value, double lo, double hi)
        : Error(msg), value(value), lo(lo), hi(hi) {}
    double value;
    double lo;
    double hi;
};

// Numerical failure: non-finite intermediate, quadrature that refuses to
// converge, singular linear system.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Input data unusable for the requested operation (too few points, no
// absorption features, wrong trace kind).
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Bad configuration: missing constants file, malformed key, unknown label.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace rbspec

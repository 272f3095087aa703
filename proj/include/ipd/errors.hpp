#pragma once

#include <stdexcept>
#include <string>

namespace ipd {

/// Base class for all library errors. Messages start with the name of the
/// operation that failed, e.g. "bl_raw_spd: need at least 3 strikes".
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input text (CSV rows, JSON sidecars).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Structurally invalid data: broken type invariants, violated preconditions,
/// degenerate inputs.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Query outside the covered domain (grid support, probability range,
/// extrapolation past the state grid).
class RangeError : public Error {
public:
    using Error::Error;
};

/// Numerical solver failure: iteration cap, singular system, ODE divergence.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Benchmark calibration failure (bracketing, degenerate quantile fit).
class CalibrationError : public Error {
public:
    using Error::Error;
};

} // namespace ipd

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rdflow {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. line() is 1-based, or 0 when unknown (e.g. JSON).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Well-formed but inconsistent data: duplicate ids, negative impedance, empty tables.
class DataError : public Error {
public:
    using Error::Error;
};

/// Closed branches do not form a tree rooted at the substation.
class TopologyError : public Error {
public:
    using Error::Error;
};

/// A branch is numbered before the branch feeding its sending node.
/// Recoverable through renumber_sequential.
class OrderingError : public TopologyError {
public:
    using TopologyError::TopologyError;
};

/// Division by a zero-magnitude phasor, collapsed voltage, or a non-finite value.
class NumericError : public Error {
public:
    using Error::Error;
};

class SingularityError : public NumericError {
public:
    using NumericError::NumericError;
};

class VoltageCollapseError : public NumericError {
public:
    VoltageCollapseError(const std::string& what, std::size_t node)
        : NumericError(what), node_(node) {}
    std::size_t node() const { return node_; }

private:
    std::size_t node_;
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, int iterations, double max_delta)
        : Error(what), iterations_(iterations), max_delta_(max_delta) {}
    int iterations() const { return iterations_; }
    double max_delta() const { return max_delta_; }

private:
    int iterations_;
    double max_delta_;
};

/// A broken algorithmic invariant (e.g. a child branch current read before it was computed).
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace rdflow

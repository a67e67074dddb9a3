#pragma once

#include <stdexcept>
#include <string>

namespace radopf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document. `path()` is a JSON path ("$.edges[0].g") or a
/// MATPOWER table locator ("mpc.branch row 3").
class ParseError : public Error {
public:
    ParseError(std::string path, const std::string& message)
        : Error(path + ": " + message), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// A point lies outside the domain where derivatives are defined.
class DomainError : public Error {
public:
    using Error::Error;
};

class UnknownEdge : public Error {
public:
    using Error::Error;
};

class UnknownBus : public Error {
public:
    using Error::Error;
};

/// A point required to be strictly feasible is not.
class NotStrictlyFeasible : public Error {
public:
    using Error::Error;
};

/// The barrier solver could not make progress.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// A problem (or a relaxation of it) has no feasible point. `bound` carries
/// the best certified lower bound on the worst violation when known.
class Infeasible : public Error {
public:
    explicit Infeasible(const std::string& message, double bound = 0.0)
        : Error(message), bound_(bound) {}

    double bound() const noexcept { return bound_; }

private:
    double bound_;
};

class DegenerateGradient : public Error {
public:
    using Error::Error;
};

/// An iterate accepted by the outer loop failed the original-feasibility
/// check. Never expected; indicates a bug.
class FeasibilityRegression : public Error {
public:
    using Error::Error;
};

class TooLarge : public Error {
public:
    using Error::Error;
};

}  // namespace radopf

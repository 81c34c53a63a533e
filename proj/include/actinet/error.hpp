#pragma once

#include <stdexcept>
#include <string>

namespace actinet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file or config text.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A data structure violates one of its documented invariants.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// An argument lies outside the domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: divergence, instability, non-convergence.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Error raised by a pipeline stage; `stage()` names the stage.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& cause)
        : Error("[" + stage + "] " + cause), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace actinet

#pragma once

#include <stdexcept>
#include <string>

namespace cmtlab {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter or configuration value is out of its documented domain.
class InvalidParams : public Error {
public:
    using Error::Error;
};

/// Inputs have mismatched shapes (row widths, state counts, session counts).
class StructuralError : public Error {
public:
    using Error::Error;
};

/// An optimization problem admits no feasible point.
class InfeasibleProblem : public Error {
public:
    using Error::Error;
};

/// A Markov chain has more than one closed communicating class.
class AmbiguousChain : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) {
        throw InvalidParams(what);
    }
}

}  // namespace detail
}  // namespace cmtlab

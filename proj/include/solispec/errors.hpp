#pragma once

#include <stdexcept>
#include <string>

namespace solispec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain where an operation is defined
/// (negative s, |lambda| < mu, x0 = 0 for L+, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The input does not satisfy a structural hypothesis of the analysis:
/// no ground state found, non-monotone profile, insufficient decay.
class HypothesisViolation : public Error {
public:
    using Error::Error;
};

/// A least-squares fit or eigen-solve is too badly conditioned to trust.
class ConditioningError : public Error {
public:
    using Error::Error;
};

/// Sizes or grids of two operands do not agree.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace solispec

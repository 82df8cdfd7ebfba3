#pragma once

#include <stdexcept>
#include <string>

namespace perideval {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed inputs: non-square matrices, size mismatches.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Inputs violating a documented invariant (signs, NaN entries, cone membership).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// State vectors leaving the nonnegative cone beyond tolerance.
class ConeViolationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Configuration documents that fail to parse or validate.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = -1, int column = -1)
        : Error(what), line(line), column(column) {}
    int line;
    int column;
};

/// Arguments outside an operation's domain (e.g. negative time).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Solver breakdowns: eigen non-convergence, power-iteration stagnation.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// (I - T(omega)) or a related system is numerically singular.
class SingularityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A Fourier characteristic denominator vanished.
class ResonanceError : public NumericalError {
public:
    ResonanceError(const std::string& what, int mode) : NumericalError(what), mode(mode) {}
    int mode;
};

/// A time-stepping run blew up (NaN or sup-norm past the divergence threshold).
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, double last_finite_time)
        : NumericalError(what), last_finite_time(last_finite_time) {}
    double last_finite_time;
};

} // namespace perideval

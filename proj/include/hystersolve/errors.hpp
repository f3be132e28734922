#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyst {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Negative play threshold.
class InvalidThreshold : public Error {
public:
    explicit InvalidThreshold(double r);
};

/// Argument outside the declared range of an operator or density.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Mismatched sizes between fields, grids or memory rows.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Zero pivot in the tridiagonal elimination.
class SingularSystem : public Error {
public:
    SingularSystem(std::size_t row, double pivot);
    std::size_t row;
};

/// The nonlinear iteration of one time step did not converge.
class StepFailure : public Error {
public:
    StepFailure(std::size_t step, int iterations, double last_update, const std::string& why = {});
    std::size_t step;
    int iterations;
    double last_update;
};

/// Malformed input text (config or CSV); `line` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what);
    std::size_t line;
};

/// Configuration that parsed but breaks one or more hypotheses. Each entry
/// starts with the tag of the breached item, e.g. "hy2: ...".
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    std::vector<std::string> violations;
};

}  // namespace hyst

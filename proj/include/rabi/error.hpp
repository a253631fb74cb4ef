#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace rabi {

// Bad input: dimensions, parameter ranges, empty selections.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failure: eigensolver, convergence, pole proximity, oracle mismatch.
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public ComputationError {
public:
    using ComputationError::ComputationError;
};

class PoleProximityError : public ComputationError {
public:
    using ComputationError::ComputationError;
};

class RepresentationMismatchError : public ComputationError {
public:
    using ComputationError::ComputationError;
};

class MissedRootError : public ComputationError {
public:
    using ComputationError::ComputationError;
};

// Non-fatal diagnostics (truncation adequacy, grid coverage). The default
// handler writes one line to stderr; tests and the CLI may install their own.
using WarningHandler = std::function<void(const std::string&)>;

void warn(const std::string& message);
WarningHandler set_warning_handler(WarningHandler handler);

} // namespace rabi

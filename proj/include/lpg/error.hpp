#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lpg {

/// Malformed configuration or input file. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Solver failure or numerically invalid state. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lanczos did not reach the requested tolerance within its restart budget.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, std::vector<double> achieved)
        : NumericalError(what), achieved_(std::move(achieved)) {}

    const std::vector<double>& achieved_residuals() const noexcept { return achieved_; }

private:
    std::vector<double> achieved_;
};

}  // namespace lpg

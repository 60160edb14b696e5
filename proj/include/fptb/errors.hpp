#pragma once

#include <stdexcept>
#include <string>

namespace fptb {

/// Argument outside the mathematical domain of an operation (t <= 0, z < 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A diffusion, boundary or parameter set violates its construction invariants.
class InvalidModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The hypotheses of a bound are not met for the given inputs. The message is
/// the reason reported to the user.
class InapplicableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative numerical routine gave up; carries the best estimate obtained.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best_estimate, double error_estimate)
        : std::runtime_error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double best_estimate_;
    double error_estimate_;
};

/// Simulation request exceeds the configured compute budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An integral or extremum that should be finite diverges.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed scenario or expression text. Line and column are 1-based; 0
/// means unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line = 0, int column = 0)
        : std::runtime_error(format(what, line, column)), line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, int line, int column) {
        if (line <= 0) return what;
        return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what;
    }

    int line_;
    int column_;
};

}  // namespace fptb

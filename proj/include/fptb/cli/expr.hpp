#pragma once

#include <memory>
#include <string>
#include <utility>

namespace fptb::cli {

/// Value and first derivative carried together through evaluation.
struct Dual {
    double value = 0.0;
    double derivative = 0.0;
};

/// Expression in one variable: numbers, the variable, pi, + - * / ^ and
/// exp, log, sqrt, sin, cos. Immutable; copies share the tree.
class Expr {
public:
    struct Node;

    /// Throws ParseError with the 1-based line and column of the offending
    /// character; `line` and `column` locate the text inside a larger file.
    static Expr parse(const std::string& text, const std::string& variable, int line = 1, int column = 1);
    static Expr constant(double c);

    double operator()(double x) const;
    /// Forward-mode evaluation. Throws DomainError outside the domain of a
    /// function (log of a non-positive number, ...).
    Dual eval_dual(double x) const;
    /// Symbolic derivative with respect to the variable.
    Expr derivative() const;

    const std::string& variable() const noexcept { return variable_; }
    /// Original text for parsed expressions, a rendering otherwise.
    const std::string& source() const noexcept { return source_; }
    std::string render() const;
    bool is_constant() const;

private:
    Expr(std::shared_ptr<const Node> root, std::string variable, std::string source);
    std::shared_ptr<const Node> root_;
    std::string variable_;
    std::string source_;
};

/// (value, derivative) at a point.
std::pair<double, double> eval_expr_with_derivative(const Expr& e, double at);

}  // namespace fptb::cli

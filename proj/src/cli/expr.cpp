#include "fptb/cli/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "fptb/errors.hpp"

namespace fptb::cli {

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Exp, Log, Sqrt, Sin, Cos };

struct Expr::Node {
    Op op;
    double c = 0.0;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

constexpr double kPi = 3.14159265358979323846;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double c = 0.0) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    n->c = c;
    return n;
}

NodePtr num(double c) { return make(Op::Const, nullptr, nullptr, c); }
bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->c == v; }
bool is_const(const NodePtr& n) { return n->op == Op::Const; }

double apply(Op op, double a, double b) {
    switch (op) {
        case Op::Neg: return -a;
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        case Op::Div: return a / b;
        case Op::Pow: return std::pow(a, b);
        case Op::Exp: return std::exp(a);
        case Op::Log: return std::log(a);
        case Op::Sqrt: return std::sqrt(a);
        case Op::Sin: return std::sin(a);
        case Op::Cos: return std::cos(a);
        default: return 0.0;
    }
}

NodePtr neg(NodePtr a) {
    if (is_const(a)) return num(-a->c);
    if (a->op == Op::Neg) return a->a;
    return make(Op::Neg, std::move(a));
}

NodePtr add(NodePtr a, NodePtr b) {
    if (is_const(a) && is_const(b)) return num(a->c + b->c);
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return make(Op::Add, std::move(a), std::move(b));
}

NodePtr sub(NodePtr a, NodePtr b) {
    if (is_const(a) && is_const(b)) return num(a->c - b->c);
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return neg(std::move(b));
    return make(Op::Sub, std::move(a), std::move(b));
}

NodePtr mul(NodePtr a, NodePtr b) {
    if (is_const(a) && is_const(b)) return num(a->c * b->c);
    if (is_const(a, 0.0) || is_const(b, 0.0)) return num(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return make(Op::Mul, std::move(a), std::move(b));
}

NodePtr divide(NodePtr a, NodePtr b) {
    if (is_const(a) && is_const(b) && b->c != 0.0) return num(a->c / b->c);
    if (is_const(a, 0.0)) return num(0.0);
    if (is_const(b, 1.0)) return a;
    return make(Op::Div, std::move(a), std::move(b));
}

NodePtr power(NodePtr a, NodePtr b) {
    if (is_const(b, 0.0)) return num(1.0);
    if (is_const(b, 1.0)) return a;
    if (is_const(a) && is_const(b)) {
        const double v = std::pow(a->c, b->c);
        if (std::isfinite(v)) return num(v);
    }
    return make(Op::Pow, std::move(a), std::move(b));
}

NodePtr func(Op op, NodePtr a) {
    if (is_const(a)) {
        const double v = apply(op, a->c, 0.0);
        if (std::isfinite(v)) return num(v);
    }
    return make(op, std::move(a));
}

const char* name_of(Op op) {
    switch (op) {
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::Sqrt: return "sqrt";
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        default: return "?";
    }
}

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

void domain_check(bool ok, const char* what, double arg) {
    if (!ok) {
        std::ostringstream os;
        os << what << " is undefined at " << arg;
        throw DomainError(os.str());
    }
}

Dual eval(const NodePtr& n, double x) {
    switch (n->op) {
        case Op::Const: return {n->c, 0.0};
        case Op::Var: return {x, 1.0};
        case Op::Neg: {
            const Dual a = eval(n->a, x);
            return {-a.value, -a.derivative};
        }
        case Op::Add: {
            const Dual a = eval(n->a, x), b = eval(n->b, x);
            return {a.value + b.value, a.derivative + b.derivative};
        }
        case Op::Sub: {
            const Dual a = eval(n->a, x), b = eval(n->b, x);
            return {a.value - b.value, a.derivative - b.derivative};
        }
        case Op::Mul: {
            const Dual a = eval(n->a, x), b = eval(n->b, x);
            return {a.value * b.value, a.derivative * b.value + a.value * b.derivative};
        }
        case Op::Div: {
            const Dual a = eval(n->a, x), b = eval(n->b, x);
            domain_check(b.value != 0.0, "division by zero", x);
            return {a.value / b.value, (a.derivative * b.value - a.value * b.derivative) / (b.value * b.value)};
        }
        case Op::Pow: {
            const Dual a = eval(n->a, x);
            if (is_const(n->b)) {
                const double p = n->b->c;
                domain_check(a.value > 0.0 || is_integer(p) || (a.value == 0.0 && p > 0.0), "power", x);
                const double v = std::pow(a.value, p);
                const double d = p == 0.0 ? 0.0 : p * std::pow(a.value, p - 1.0) * a.derivative;
                return {v, a.derivative == 0.0 ? 0.0 : d};
            }
            const Dual b = eval(n->b, x);
            domain_check(a.value > 0.0, "power with variable exponent", x);
            const double v = std::pow(a.value, b.value);
            return {v, v * (b.derivative * std::log(a.value) + b.value * a.derivative / a.value)};
        }
        case Op::Exp: {
            const Dual a = eval(n->a, x);
            const double v = std::exp(a.value);
            return {v, v * a.derivative};
        }
        case Op::Log: {
            const Dual a = eval(n->a, x);
            domain_check(a.value > 0.0, "log", x);
            return {std::log(a.value), a.derivative / a.value};
        }
        case Op::Sqrt: {
            const Dual a = eval(n->a, x);
            domain_check(a.value >= 0.0, "sqrt", x);
            const double v = std::sqrt(a.value);
            return {v, a.derivative == 0.0 ? 0.0 : a.derivative / (2.0 * v)};
        }
        case Op::Sin: {
            const Dual a = eval(n->a, x);
            return {std::sin(a.value), std::cos(a.value) * a.derivative};
        }
        case Op::Cos: {
            const Dual a = eval(n->a, x);
            return {std::cos(a.value), -std::sin(a.value) * a.derivative};
        }
    }
    return {0.0, 0.0};
}

NodePtr diff(const NodePtr& n) {
    switch (n->op) {
        case Op::Const: return num(0.0);
        case Op::Var: return num(1.0);
        case Op::Neg: return neg(diff(n->a));
        case Op::Add: return add(diff(n->a), diff(n->b));
        case Op::Sub: return sub(diff(n->a), diff(n->b));
        case Op::Mul: return add(mul(diff(n->a), n->b), mul(n->a, diff(n->b)));
        case Op::Div:
            return divide(sub(mul(diff(n->a), n->b), mul(n->a, diff(n->b))), power(n->b, num(2.0)));
        case Op::Pow:
            if (is_const(n->b)) {
                return mul(mul(n->b, power(n->a, num(n->b->c - 1.0))), diff(n->a));
            }
            return mul(n, add(mul(diff(n->b), func(Op::Log, n->a)), divide(mul(n->b, diff(n->a)), n->a)));
        case Op::Exp: return mul(n, diff(n->a));
        case Op::Log: return divide(diff(n->a), n->a);
        case Op::Sqrt: return divide(diff(n->a), mul(num(2.0), n));
        case Op::Sin: return mul(func(Op::Cos, n->a), diff(n->a));
        case Op::Cos: return neg(mul(func(Op::Sin, n->a), diff(n->a)));
    }
    return num(0.0);
}

int precedence(Op op) {
    switch (op) {
        case Op::Add:
        case Op::Sub: return 1;
        case Op::Mul:
        case Op::Div: return 2;
        case Op::Neg: return 3;
        case Op::Pow: return 4;
        default: return 5;
    }
}

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string render_node(const NodePtr& n, const std::string& var) {
    auto wrap = [&](const NodePtr& child, int min_prec) {
        std::string s = render_node(child, var);
        const bool negative_literal = child->op == Op::Const && child->c < 0.0;
        if (precedence(child->op) < min_prec || (negative_literal && min_prec > 1)) return "(" + s + ")";
        return s;
    };
    switch (n->op) {
        case Op::Const: return format_number(n->c);
        case Op::Var: return var;
        case Op::Neg: return "-" + wrap(n->a, 4);
        case Op::Add: return wrap(n->a, 1) + " + " + wrap(n->b, 2);
        case Op::Sub: return wrap(n->a, 1) + " - " + wrap(n->b, 2);
        case Op::Mul: return wrap(n->a, 2) + "*" + wrap(n->b, 3);
        case Op::Div: return wrap(n->a, 2) + "/" + wrap(n->b, 3);
        case Op::Pow: return wrap(n->a, 5) + "^" + wrap(n->b, 4);
        default: return std::string(name_of(n->op)) + "(" + render_node(n->a, var) + ")";
    }
}

class Parser {
public:
    Parser(const std::string& text, const std::string& var, int line, int column)
        : text_(text), var_(var), line0_(line), col0_(column) {}

    NodePtr run() {
        skip();
        if (pos_ >= text_.size()) fail("empty expression");
        NodePtr n = expression();
        skip();
        if (pos_ < text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        int line = line0_;
        int col = col0_;
        for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(what, line, col);
    }

    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expression() {
        NodePtr n = term();
        for (;;) {
            if (accept('+')) {
                n = make(Op::Add, n, term());
            } else if (accept('-')) {
                n = make(Op::Sub, n, term());
            } else {
                return n;
            }
        }
    }

    NodePtr term() {
        NodePtr n = unary();
        for (;;) {
            if (accept('*')) {
                n = make(Op::Mul, n, unary());
            } else if (accept('/')) {
                n = make(Op::Div, n, unary());
            } else {
                return n;
            }
        }
    }

    NodePtr unary() {
        if (accept('-')) return neg(unary());
        if (accept('+')) return unary();
        return pow_expr();
    }

    NodePtr pow_expr() {
        NodePtr base = primary();
        if (accept('^')) return make(Op::Pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            const std::string id = text_.substr(start, pos_ - start);
            if (id == var_) return make(Op::Var);
            if (id == "pi") return num(kPi);
            Op op;
            if (id == "exp") {
                op = Op::Exp;
            } else if (id == "log") {
                op = Op::Log;
            } else if (id == "sqrt") {
                op = Op::Sqrt;
            } else if (id == "sin") {
                op = Op::Sin;
            } else if (id == "cos") {
                op = Op::Cos;
            } else {
                pos_ = start;
                fail("unknown identifier '" + id + "' (the variable is '" + var_ + "')");
            }
            if (!accept('(')) fail("expected '(' after " + id);
            NodePtr arg = expression();
            if (!accept(')')) fail("expected ')'");
            return make(op, arg);
        }
        if (accept('(')) {
            NodePtr n = expression();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        fail(std::string("unexpected '") + c + "'");
    }

    NodePtr number() {
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        return num(v);
    }

    const std::string& text_;
    const std::string& var_;
    int line0_;
    int col0_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr::Expr(std::shared_ptr<const Node> root, std::string variable, std::string source)
    : root_(std::move(root)), variable_(std::move(variable)), source_(std::move(source)) {}

Expr Expr::parse(const std::string& text, const std::string& variable, int line, int column) {
    if (variable.empty()) throw ParseError("expression variable must not be empty");
    Parser p(text, variable, line, column);
    return Expr(p.run(), variable, text);
}

Expr Expr::constant(double c) { return Expr(num(c), "y", format_number(c)); }

double Expr::operator()(double x) const { return eval(root_, x).value; }

Dual Expr::eval_dual(double x) const { return eval(root_, x); }

Expr Expr::derivative() const {
    NodePtr d = diff(root_);
    std::string text = render_node(d, variable_);
    return Expr(std::move(d), variable_, std::move(text));
}

std::string Expr::render() const { return render_node(root_, variable_); }

bool Expr::is_constant() const { return root_->op == Op::Const; }

std::pair<double, double> eval_expr_with_derivative(const Expr& e, double at) {
    const Dual d = e.eval_dual(at);
    return {d.value, d.derivative};
}

}  // namespace fptb::cli

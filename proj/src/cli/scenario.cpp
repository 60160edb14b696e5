#include "fptb/cli/scenario.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fptb/cli/expr.hpp"
#include "fptb/errors.hpp"

namespace fptb::cli {

namespace {

// ---- TOML subset: tables, arrays of tables, strings, numbers, booleans ----

struct Value {
    enum class Kind { String, Number, Bool } kind = Kind::String;
    std::string text;
    double number = 0.0;
    bool integer = false;
    bool boolean = false;
    int line = 0;
    int column = 0;
};

struct Table {
    std::map<std::string, Value> entries;
    int line = 0;
};

struct Document {
    Table root;
    std::map<std::string, Table> tables;
    std::map<std::string, std::vector<Table>> arrays;
};

bool is_key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

class TomlReader {
public:
    explicit TomlReader(const std::string& text) : text_(text) {}

    Document read() {
        Document doc;
        Table* current = &doc.root;
        std::istringstream in(text_);
        std::string raw;
        int line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            if (!raw.empty() && raw.back() == '\r') raw.pop_back();
            line_ = &raw;
            line_no_ = line_no;
            pos_ = 0;
            skip_ws();
            if (at_end() || peek() == '#') continue;
            if (peek() == '[') {
                const bool array = raw.compare(pos_, 2, "[[") == 0;
                pos_ += array ? 2 : 1;
                skip_ws();
                const std::string name = key();
                skip_ws();
                if (array ? raw.compare(pos_, 2, "]]") != 0 : peek() != ']') fail("expected closing bracket");
                pos_ += array ? 2 : 1;
                expect_line_end();
                if (array) {
                    doc.arrays[name].push_back(Table{{}, line_no});
                    current = &doc.arrays[name].back();
                } else {
                    if (doc.tables.count(name)) fail("table [" + name + "] defined twice");
                    doc.tables[name] = Table{{}, line_no};
                    current = &doc.tables[name];
                }
                continue;
            }
            const int key_col = static_cast<int>(pos_) + 1;
            const std::string k = key();
            skip_ws();
            if (peek() != '=') fail("expected '=' after key");
            ++pos_;
            skip_ws();
            Value v = value();
            expect_line_end();
            if (current->entries.count(k)) fail_at("duplicate key '" + k + "'", key_col);
            current->entries[k] = v;
        }
        return doc;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { fail_at(what, static_cast<int>(pos_) + 1); }
    [[noreturn]] void fail_at(const std::string& what, int col) const { throw ParseError(what, line_no_, col); }

    bool at_end() const { return pos_ >= line_->size(); }
    char peek() const { return at_end() ? '\0' : (*line_)[pos_]; }

    void skip_ws() {
        while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    void expect_line_end() {
        skip_ws();
        if (!at_end() && peek() != '#') fail("unexpected text after value");
    }

    std::string key() {
        const std::size_t start = pos_;
        while (!at_end() && is_key_char(peek())) ++pos_;
        if (pos_ == start) fail("expected a key");
        return line_->substr(start, pos_ - start);
    }

    Value value() {
        Value v;
        v.line = line_no_;
        v.column = static_cast<int>(pos_) + 1;
        if (at_end()) fail("missing value");
        if (peek() == '"') {
            ++pos_;
            v.kind = Value::Kind::String;
            v.column = static_cast<int>(pos_) + 1;
            for (;;) {
                if (at_end()) fail("unterminated string");
                const char c = peek();
                ++pos_;
                if (c == '"') break;
                if (c == '\\') {
                    if (at_end()) fail("unterminated escape");
                    const char e = peek();
                    ++pos_;
                    switch (e) {
                        case '"': v.text += '"'; break;
                        case '\\': v.text += '\\'; break;
                        case 'n': v.text += '\n'; break;
                        case 't': v.text += '\t'; break;
                        default: fail(std::string("unknown escape \\") + e);
                    }
                } else {
                    v.text += c;
                }
            }
            return v;
        }
        const std::size_t start = pos_;
        while (!at_end() && peek() != '#' && peek() != ' ' && peek() != '\t') ++pos_;
        const std::string tok = line_->substr(start, pos_ - start);
        if (tok == "true" || tok == "false") {
            v.kind = Value::Kind::Bool;
            v.boolean = tok == "true";
            return v;
        }
        char* end = nullptr;
        const double num = std::strtod(tok.c_str(), &end);
        if (tok.empty() || end != tok.c_str() + tok.size() || !std::isfinite(num)) {
            pos_ = start;
            fail("malformed value '" + tok + "'");
        }
        v.kind = Value::Kind::Number;
        v.number = num;
        v.integer = tok.find_first_of(".eE") == std::string::npos;
        v.text = tok;
        return v;
    }

    const std::string& text_;
    const std::string* line_ = nullptr;
    int line_no_ = 0;
    std::size_t pos_ = 0;
};

// Typed access to one table; reports keys that were never read.
class Section {
public:
    Section(const Table& table, std::string name) : table_(table), name_(std::move(name)) {}

    const Value* find(const std::string& key) {
        used_.insert(key);
        auto it = table_.entries.find(key);
        return it == table_.entries.end() ? nullptr : &it->second;
    }

    void get(const std::string& key, double& out) {
        if (const Value* v = find(key)) out = number(*v, key);
    }

    void get(const std::string& key, int& out) {
        if (const Value* v = find(key)) out = static_cast<int>(integer(*v, key));
    }

    void get(const std::string& key, std::int64_t& out) {
        if (const Value* v = find(key)) out = integer(*v, key);
    }

    void get(const std::string& key, std::uint64_t& out) {
        if (const Value* v = find(key)) {
            const std::int64_t i = integer(*v, key);
            if (i < 0) throw ParseError("'" + key + "' must be non-negative", v->line, v->column);
            out = static_cast<std::uint64_t>(i);
        }
    }

    void get(const std::string& key, bool& out) {
        if (const Value* v = find(key)) {
            if (v->kind != Value::Kind::Bool) throw ParseError("'" + key + "' must be true or false", v->line, v->column);
            out = v->boolean;
        }
    }

    void get(const std::string& key, std::string& out) {
        if (const Value* v = find(key)) {
            if (v->kind != Value::Kind::String) throw ParseError("'" + key + "' must be a string", v->line, v->column);
            out = v->text;
        }
    }

    /// A number or the string "auto" (empty optional).
    void get_auto(const std::string& key, std::optional<double>& out) {
        if (const Value* v = find(key)) {
            if (v->kind == Value::Kind::String && v->text == "auto") {
                out.reset();
            } else {
                out = number(*v, key);
            }
        }
    }

    void get_auto(const std::string& key, std::optional<int>& out) {
        if (const Value* v = find(key)) {
            if (v->kind == Value::Kind::String && v->text == "auto") {
                out.reset();
            } else {
                out = static_cast<int>(integer(*v, key));
            }
        }
    }

    void get_opt(const std::string& key, std::optional<double>& out) {
        if (const Value* v = find(key)) out = number(*v, key);
    }

    void get_opt(const std::string& key, std::optional<std::string>& out) {
        if (const Value* v = find(key)) {
            if (v->kind != Value::Kind::String) throw ParseError("'" + key + "' must be a string", v->line, v->column);
            out = v->text;
        }
    }

    /// Position of a key's value, or of the table header when absent.
    std::pair<int, int> where(const std::string& key) const {
        auto it = table_.entries.find(key);
        if (it == table_.entries.end()) return {table_.line, 1};
        return {it->second.line, it->second.column};
    }

    void finish() const {
        for (const auto& [k, v] : table_.entries) {
            if (!used_.count(k)) throw ParseError("unknown key '" + k + "' in " + name_, v.line, 1);
        }
    }

private:
    static double number(const Value& v, const std::string& key) {
        if (v.kind != Value::Kind::Number) throw ParseError("'" + key + "' must be a number", v.line, v.column);
        return v.number;
    }

    static std::int64_t integer(const Value& v, const std::string& key) {
        if (v.kind != Value::Kind::Number || !v.integer) {
            throw ParseError("'" + key + "' must be an integer", v.line, v.column);
        }
        return static_cast<std::int64_t>(std::llround(v.number));
    }

    const Table& table_;
    std::string name_;
    std::set<std::string> used_;
};

[[noreturn]] void invalid(const Section& s, const std::string& key, const std::string& what) {
    const auto [line, col] = s.where(key);
    throw ParseError(what, line, col);
}

void require_one_of(const Section& s, const std::string& key, const std::string& value,
                    std::initializer_list<const char*> allowed) {
    for (const char* a : allowed) {
        if (value == a) return;
    }
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    invalid(s, key, "'" + key + "' must be one of: " + list);
}

Expr parse_expr_at(const Section& s, const std::string& key, const std::string& text, const std::string& var) {
    const auto [line, col] = s.where(key);
    return Expr::parse(text, var, line, col);
}

const Table kEmpty{};

void read_diffusion(Section s, DiffusionSection& d) {
    s.get("kind", d.kind);
    s.get("drift", d.drift);
    s.get("theta", d.theta);
    s.get("mean", d.mean);
    s.get("dimension", d.dimension);
    s.get("nu", d.nu);
    s.get("sigma", d.sigma);
    s.get("nu_expr", d.nu_expr);
    s.get("sigma_expr", d.sigma_expr);
    s.get("mu_expr", d.mu_expr);
    s.get("interval", d.interval);
    s.get("x", d.x);
    s.finish();
    require_one_of(s, "kind", d.kind, {"bm", "ou", "bessel", "gbm", "custom", "unit_drift"});
    require_one_of(s, "interval", d.interval, {"auto", "A", "B"});
    if (!std::isfinite(d.x)) invalid(s, "x", "start x must be finite");
    if (d.kind == "bm" || d.kind == "ou" || d.kind == "gbm") {
        if (d.interval == "B") invalid(s, "interval", d.kind + " lives on the whole line");
    }
    if (d.kind == "ou" && !(d.theta > 0.0)) invalid(s, "theta", "theta must be positive");
    if (d.kind == "bessel") {
        if (d.interval == "A") invalid(s, "interval", "a Bessel process lives on the half line");
        if (d.dimension < 2) invalid(s, "dimension", "Bessel dimension must be at least 2");
        if (!(d.x > 0.0)) invalid(s, "x", "Bessel start must be positive");
    }
    if (d.kind == "gbm") {
        if (!(d.sigma > 0.0)) invalid(s, "sigma", "σ must be positive");
        if (!(d.x > 0.0)) invalid(s, "x", "geometric Brownian motion starts at a positive value");
    }
    if (d.kind == "custom") {
        if (d.nu_expr.empty()) invalid(s, "nu_expr", "custom diffusion needs nu_expr");
        if (d.sigma_expr.empty()) invalid(s, "sigma_expr", "custom diffusion needs sigma_expr");
        parse_expr_at(s, "nu_expr", d.nu_expr, "y");
        const Expr sigma = parse_expr_at(s, "sigma_expr", d.sigma_expr, "y");
        double v = 0.0;
        try {
            v = sigma(d.x);
        } catch (const DomainError&) {
            v = std::nan("");
        }
        if (!(v > 0.0)) invalid(s, "sigma_expr", "σ must be positive");
    }
    if (d.kind == "unit_drift") {
        if (d.mu_expr.empty()) invalid(s, "mu_expr", "unit_drift diffusion needs mu_expr");
        parse_expr_at(s, "mu_expr", d.mu_expr, "y");
    }
}

void read_boundary(Section s, BoundarySection& b, const DiffusionSection& d) {
    s.get("side", b.side);
    s.get("kind", b.kind);
    s.get("delta", b.delta);
    s.get("kappa1", b.kappa1);
    s.get("kappa2", b.kappa2);
    s.get("A", b.A);
    s.get("B", b.B);
    s.get("a", b.a);
    s.get("b", b.b);
    s.get("c", b.c);
    s.get("expr", b.expr);
    s.get("lipschitz", b.lipschitz);
    s.get("k_minus", b.k_minus);
    s.get("k_plus", b.k_plus);
    s.finish();
    require_one_of(s, "side", b.side, {"upper", "lower"});
    require_one_of(s, "kind", b.kind, {"daniels", "hyperbolic_ou", "linear", "constant", "expr"});
    require_one_of(s, "lipschitz", b.lipschitz, {"auto", "given"});
    if (b.kind == "daniels") {
        if (b.delta == 0.0) invalid(s, "delta", "Daniels delta must be non-zero");
        if (!(b.kappa1 > 0.0)) invalid(s, "kappa1", "Daniels kappa1 must be positive");
        if (!(b.kappa1 * b.kappa1 + 4.0 * b.kappa2 > 0.0)) {
            invalid(s, "kappa2", "Daniels parameters need kappa1^2 + 4 kappa2 > 0");
        }
    }
    if (b.kind == "hyperbolic_ou" && d.kind != "ou") {
        invalid(s, "kind", "hyperbolic_ou boundaries need an ou diffusion");
    }
    if (b.kind == "expr") {
        if (b.expr.empty()) invalid(s, "expr", "expr boundary needs an expression");
        parse_expr_at(s, "expr", b.expr, "t");
    }
    if (b.lipschitz == "given" && (!(b.k_minus >= 0.0) || !(b.k_plus >= 0.0))) {
        invalid(s, "k_minus", "Lipschitz constants must be non-negative");
    }
}

void read_approximation(Section s, ApproximationSection& a) {
    s.get("type", a.type);
    s.get("n", a.n);
    s.get("expr", a.expr);
    s.get("lower_expr", a.lower_expr);
    s.get_auto("eps", a.eps);
    s.get_opt("xi", a.xi);
    s.finish();
    require_one_of(s, "type", a.type, {"none", "eps", "piecewise_linear", "expr"});
    if (a.n < 1) invalid(s, "n", "n must be at least 1");
    if (a.eps && !(*a.eps >= 0.0)) invalid(s, "eps", "eps must be non-negative");
    if (a.type == "eps" && !a.eps) invalid(s, "eps", "approximation type eps needs a numeric eps");
    if (a.xi && !(*a.xi >= 0.0)) invalid(s, "xi", "xi must be non-negative");
    if (a.type == "expr") {
        if (a.expr.empty() && a.lower_expr.empty()) invalid(s, "expr", "approximation type expr needs expr");
        if (!a.expr.empty()) parse_expr_at(s, "expr", a.expr, "t");
        if (!a.lower_expr.empty()) parse_expr_at(s, "lower_expr", a.lower_expr, "t");
    }
}

void read_reference(Section s, ReferenceSection& r) {
    s.get("kind", r.kind);
    s.get_auto("dimension", r.dimension);
    s.get("d_max", r.d_max);
    s.finish();
    require_one_of(s, "kind", r.kind, {"auto", "bm", "bessel"});
    if (r.dimension && *r.dimension < 3) invalid(s, "dimension", "reference dimension must be at least 3");
    if (r.d_max < 3) invalid(s, "d_max", "d_max must be at least 3");
}

void read_run(Section s, RunSection& r) {
    s.get_auto("t0", r.t0);
    s.get("t_step", r.t_step);
    s.finish();
    if (r.t0 && !(*r.t0 >= 0.0 && *r.t0 < 1.0)) invalid(s, "t0", "t0 must lie in [0, 1)");
    if (!(r.t_step > 0.0) || r.t_step > 0.1) invalid(s, "t_step", "t_step must lie in (0, 0.1]");
}

void read_mc(Section s, McSection& m) {
    s.get("enabled", m.enabled);
    s.get("paths", m.paths);
    s.get("step", m.step);
    s.get("seed", m.seed);
    s.get("bridge_correction", m.bridge_correction);
    s.get("bins", m.bins);
    s.get("budget", m.budget);
    s.finish();
    if (m.paths < 1) invalid(s, "paths", "paths must be at least 1");
    if (!(m.step > 0.0) || m.step > 1.0) invalid(s, "step", "step must lie in (0, 1]");
    if (m.bins < 1) invalid(s, "bins", "bins must be at least 1");
    if (!(m.budget > 0.0)) invalid(s, "budget", "budget must be positive");
}

void read_expect(Section s, ExpectSection& e) {
    s.get_opt("coefficient", e.coefficient);
    s.get("coefficient_tol", e.coefficient_tol);
    s.get_opt("t0", e.t0);
    s.get("t0_tol", e.t0_tol);
    s.get_opt("max_rel_error", e.max_rel_error);
    s.get("density_floor", e.density_floor);
    s.get_opt("b_star_reason", e.b_star_reason);
    s.finish();
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out + "\"";
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    const Document doc = TomlReader(text).read();
    Scenario sc;
    {
        Section root(doc.root, "the top level");
        root.get("name", sc.name);
        root.get("description", sc.description);
        root.finish();
    }
    for (const auto& [name, table] : doc.tables) {
        static const std::set<std::string> known{"diffusion", "approximation", "reference", "run", "mc", "expect"};
        if (!known.count(name)) throw ParseError("unknown table [" + name + "]", table.line, 1);
    }
    for (const auto& [name, tables] : doc.arrays) {
        if (name != "boundary") throw ParseError("unknown table array [[" + name + "]]", tables.front().line, 1);
    }
    auto table = [&](const std::string& name) -> const Table& {
        auto it = doc.tables.find(name);
        return it == doc.tables.end() ? kEmpty : it->second;
    };
    if (!doc.tables.count("diffusion")) throw ParseError("missing [diffusion] table", 1, 1);
    read_diffusion(Section(table("diffusion"), "[diffusion]"), sc.diffusion);
    auto it = doc.arrays.find("boundary");
    if (it == doc.arrays.end() || it->second.empty()) throw ParseError("at least one [[boundary]] is required", 1, 1);
    int uppers = 0;
    int lowers = 0;
    for (const Table& t : it->second) {
        BoundarySection b;
        read_boundary(Section(t, "[[boundary]]"), b, sc.diffusion);
        (b.side == "upper" ? uppers : lowers)++;
        if (uppers > 1 || lowers > 1) throw ParseError("at most one upper and one lower boundary", t.line, 1);
        sc.boundaries.push_back(b);
    }
    if (lowers > 0 && (sc.diffusion.kind == "bessel" || sc.diffusion.interval == "B")) {
        throw ParseError("lower boundaries are supported on the whole line only", it->second.back().line, 1);
    }
    read_approximation(Section(table("approximation"), "[approximation]"), sc.approximation);
    read_reference(Section(table("reference"), "[reference]"), sc.reference);
    read_run(Section(table("run"), "[run]"), sc.run);
    read_mc(Section(table("mc"), "[mc]"), sc.mc);
    read_expect(Section(table("expect"), "[expect]"), sc.expect);
    return sc;
}

std::string serialize_scenario(const Scenario& s) {
    std::ostringstream o;
    o << "name = " << quote(s.name) << "\n";
    if (!s.description.empty()) o << "description = " << quote(s.description) << "\n";

    const DiffusionSection& d = s.diffusion;
    o << "\n[diffusion]\n";
    o << "kind = " << quote(d.kind) << "\n";
    o << "interval = " << quote(d.interval) << "\n";
    o << "x = " << fmt(d.x) << "\n";
    o << "drift = " << fmt(d.drift) << "\n";
    o << "theta = " << fmt(d.theta) << "\n";
    o << "mean = " << fmt(d.mean) << "\n";
    o << "dimension = " << d.dimension << "\n";
    o << "nu = " << fmt(d.nu) << "\n";
    o << "sigma = " << fmt(d.sigma) << "\n";
    if (!d.nu_expr.empty()) o << "nu_expr = " << quote(d.nu_expr) << "\n";
    if (!d.sigma_expr.empty()) o << "sigma_expr = " << quote(d.sigma_expr) << "\n";
    if (!d.mu_expr.empty()) o << "mu_expr = " << quote(d.mu_expr) << "\n";

    for (const auto& b : s.boundaries) {
        o << "\n[[boundary]]\n";
        o << "side = " << quote(b.side) << "\n";
        o << "kind = " << quote(b.kind) << "\n";
        o << "delta = " << fmt(b.delta) << "\n";
        o << "kappa1 = " << fmt(b.kappa1) << "\n";
        o << "kappa2 = " << fmt(b.kappa2) << "\n";
        o << "A = " << fmt(b.A) << "\n";
        o << "B = " << fmt(b.B) << "\n";
        o << "a = " << fmt(b.a) << "\n";
        o << "b = " << fmt(b.b) << "\n";
        o << "c = " << fmt(b.c) << "\n";
        if (!b.expr.empty()) o << "expr = " << quote(b.expr) << "\n";
        o << "lipschitz = " << quote(b.lipschitz) << "\n";
        o << "k_minus = " << fmt(b.k_minus) << "\n";
        o << "k_plus = " << fmt(b.k_plus) << "\n";
    }

    const ApproximationSection& a = s.approximation;
    o << "\n[approximation]\n";
    o << "type = " << quote(a.type) << "\n";
    o << "n = " << a.n << "\n";
    if (!a.expr.empty()) o << "expr = " << quote(a.expr) << "\n";
    if (!a.lower_expr.empty()) o << "lower_expr = " << quote(a.lower_expr) << "\n";
    o << "eps = " << (a.eps ? fmt(*a.eps) : quote("auto")) << "\n";
    if (a.xi) o << "xi = " << fmt(*a.xi) << "\n";

    const ReferenceSection& r = s.reference;
    o << "\n[reference]\n";
    o << "kind = " << quote(r.kind) << "\n";
    o << "dimension = " << (r.dimension ? std::to_string(*r.dimension) : quote("auto")) << "\n";
    o << "d_max = " << r.d_max << "\n";

    o << "\n[run]\n";
    o << "t0 = " << (s.run.t0 ? fmt(*s.run.t0) : quote("auto")) << "\n";
    o << "t_step = " << fmt(s.run.t_step) << "\n";

    const McSection& m = s.mc;
    o << "\n[mc]\n";
    o << "enabled = " << (m.enabled ? "true" : "false") << "\n";
    o << "paths = " << m.paths << "\n";
    o << "step = " << fmt(m.step) << "\n";
    o << "seed = " << m.seed << "\n";
    o << "bridge_correction = " << (m.bridge_correction ? "true" : "false") << "\n";
    o << "bins = " << m.bins << "\n";
    o << "budget = " << fmt(m.budget) << "\n";

    const ExpectSection& e = s.expect;
    o << "\n[expect]\n";
    if (e.coefficient) o << "coefficient = " << fmt(*e.coefficient) << "\n";
    o << "coefficient_tol = " << fmt(e.coefficient_tol) << "\n";
    if (e.t0) o << "t0 = " << fmt(*e.t0) << "\n";
    o << "t0_tol = " << fmt(e.t0_tol) << "\n";
    if (e.max_rel_error) o << "max_rel_error = " << fmt(*e.max_rel_error) << "\n";
    o << "density_floor = " << fmt(e.density_floor) << "\n";
    if (e.b_star_reason) o << "b_star_reason = " << quote(*e.b_star_reason) << "\n";
    return o.str();
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace fptb::cli

#include "isofiber/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace isofiber {

namespace {

bool is_integer_valued(double v) { return std::isfinite(v) && v == std::floor(v); }

EvalResult apply_binary(Expr::Kind kind, double a, double b) {
    double out = 0.0;
    switch (kind) {
        case Expr::Kind::add: out = a + b; break;
        case Expr::Kind::sub: out = a - b; break;
        case Expr::Kind::mul: out = a * b; break;
        case Expr::Kind::div:
            if (b == 0.0) return {0.0, EvalStatus::singularity};
            out = a / b;
            break;
        case Expr::Kind::pow:
            if (a < 0.0 && !is_integer_valued(b)) return {0.0, EvalStatus::domain_error};
            if (a == 0.0 && b < 0.0) return {0.0, EvalStatus::singularity};
            out = std::pow(a, b);
            break;
        default: return {0.0, EvalStatus::domain_error};
    }
    if (!std::isfinite(out)) return {out, EvalStatus::overflow};
    return {out, EvalStatus::ok};
}

EvalResult apply_unary(Expr::Kind kind, double a) {
    double out = 0.0;
    switch (kind) {
        case Expr::Kind::negate: return {-a, EvalStatus::ok};
        case Expr::Kind::exp: out = std::exp(a); break;
        case Expr::Kind::log:
            if (a <= 0.0) return {0.0, EvalStatus::domain_error};
            out = std::log(a);
            break;
        default: return {0.0, EvalStatus::domain_error};
    }
    if (!std::isfinite(out)) return {out, EvalStatus::overflow};
    return {out, EvalStatus::ok};
}

const char* status_name(EvalStatus s) {
    switch (s) {
        case EvalStatus::ok: return "ok";
        case EvalStatus::domain_error: return "domain error";
        case EvalStatus::singularity: return "singularity";
        case EvalStatus::overflow: return "overflow";
    }
    return "?";
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

EvalError::EvalError(EvalStatus status_, double at_)
    : std::runtime_error(std::string("evaluation failed (") + status_name(status_) + ") at r=" +
                         format_double(at_)),
      status(status_),
      at(at_) {}

ParseError::ParseError(const std::string& message, std::size_t position_)
    : std::runtime_error(message + " (at position " + std::to_string(position_) + ")"),
      position(position_) {}

Expr::Expr() : node_(std::make_shared<Node>(Node{Kind::constant, 0.0, nullptr, nullptr})) {}

Expr Expr::constant(double v) {
    return Expr(std::make_shared<Node>(Node{Kind::constant, v, nullptr, nullptr}));
}

Expr Expr::variable() {
    return Expr(std::make_shared<Node>(Node{Kind::variable, 0.0, nullptr, nullptr}));
}

double Expr::constant_value() const {
    if (node_->kind != Kind::constant) throw std::logic_error("not a constant node");
    return node_->value;
}

Expr Expr::child(int i) const {
    const NodePtr& c = (i == 0) ? node_->lhs : node_->rhs;
    if (!c) throw std::logic_error("node has no such child");
    return Expr(c);
}

Expr Expr::make(Kind kind, Expr a) {
    if (a.kind() == Kind::constant) {
        if (kind == Kind::negate) return constant(-a.constant_value());
        EvalResult folded = apply_unary(kind, a.constant_value());
        if (folded.ok()) return constant(folded.value);
    }
    return Expr(std::make_shared<Node>(Node{kind, 0.0, a.node_, nullptr}));
}

Expr Expr::make(Kind kind, Expr a, Expr b) {
    const bool ca = a.kind() == Kind::constant;
    const bool cb = b.kind() == Kind::constant;
    if (ca && cb) {
        EvalResult folded = apply_binary(kind, a.constant_value(), b.constant_value());
        if (folded.ok()) return constant(folded.value);
    }
    // Identity folds; anything fancier is intentionally out of scope.
    switch (kind) {
        case Kind::add:
            if (a.is_constant(0.0)) return b;
            if (b.is_constant(0.0)) return a;
            break;
        case Kind::sub:
            if (b.is_constant(0.0)) return a;
            if (a.is_constant(0.0)) return make(Kind::negate, b);
            break;
        case Kind::mul:
            if (a.is_constant(1.0)) return b;
            if (b.is_constant(1.0)) return a;
            if (a.is_constant(0.0) || b.is_constant(0.0)) return constant(0.0);
            break;
        case Kind::div:
            if (b.is_constant(1.0)) return a;
            break;
        case Kind::pow:
            if (b.is_constant(1.0)) return a;
            if (b.is_constant(0.0)) return constant(1.0);
            break;
        default: break;
    }
    return Expr(std::make_shared<Node>(Node{kind, 0.0, a.node_, b.node_}));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::make(Expr::Kind::add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::make(Expr::Kind::sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::make(Expr::Kind::mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::make(Expr::Kind::div, a, b); }
Expr operator-(const Expr& a) { return Expr::make(Expr::Kind::negate, a); }
Expr pow(const Expr& base, const Expr& exponent) { return Expr::make(Expr::Kind::pow, base, exponent); }
Expr exp(const Expr& arg) { return Expr::make(Expr::Kind::exp, arg); }
Expr log(const Expr& arg) { return Expr::make(Expr::Kind::log, arg); }

bool Expr::is_constant(double v) const {
    return node_->kind == Kind::constant && node_->value == v;
}

bool Expr::equals(const Expr& other) const {
    if (node_ == other.node_) return true;
    if (node_->kind != other.node_->kind) return false;
    if (node_->kind == Kind::constant) return node_->value == other.node_->value;
    if (node_->kind == Kind::variable) return true;
    if (bool(node_->lhs) != bool(other.node_->lhs) || bool(node_->rhs) != bool(other.node_->rhs))
        return false;
    if (node_->lhs && !Expr(node_->lhs).equals(Expr(other.node_->lhs))) return false;
    if (node_->rhs && !Expr(node_->rhs).equals(Expr(other.node_->rhs))) return false;
    return true;
}

EvalResult Expr::try_eval(double r) const noexcept {
    switch (node_->kind) {
        case Kind::constant: return {node_->value, EvalStatus::ok};
        case Kind::variable: return {r, EvalStatus::ok};
        case Kind::negate:
        case Kind::exp:
        case Kind::log: {
            EvalResult a = Expr(node_->lhs).try_eval(r);
            if (!a.ok()) return a;
            return apply_unary(node_->kind, a.value);
        }
        default: {
            EvalResult a = Expr(node_->lhs).try_eval(r);
            if (!a.ok()) return a;
            EvalResult b = Expr(node_->rhs).try_eval(r);
            if (!b.ok()) return b;
            return apply_binary(node_->kind, a.value, b.value);
        }
    }
}

double Expr::eval(double r) const {
    EvalResult res = try_eval(r);
    if (!res.ok()) throw EvalError(res.status, r);
    return res.value;
}

Expr Expr::derivative() const {
    const Expr u = node_->lhs ? Expr(node_->lhs) : Expr();
    const Expr v = node_->rhs ? Expr(node_->rhs) : Expr();
    switch (node_->kind) {
        case Kind::constant: return constant(0.0);
        case Kind::variable: return constant(1.0);
        case Kind::negate: return -u.derivative();
        case Kind::add: return u.derivative() + v.derivative();
        case Kind::sub: return u.derivative() - v.derivative();
        case Kind::mul: return u.derivative() * v + u * v.derivative();
        case Kind::div: return (u.derivative() * v - u * v.derivative()) / (v * v);
        case Kind::pow:
            if (v.kind() == Kind::constant) {
                const double p = v.constant_value();
                return constant(p) * pow(u, constant(p - 1.0)) * u.derivative();
            }
            // u^v * (v' log u + v u'/u)
            return pow(u, v) * (v.derivative() * log(u) + v * u.derivative() / u);
        case Kind::exp: return exp(u) * u.derivative();
        case Kind::log: return u.derivative() / u;
    }
    return constant(0.0);
}

Expr Expr::substitute(const Expr& replacement) const {
    switch (node_->kind) {
        case Kind::constant: return *this;
        case Kind::variable: return replacement;
        case Kind::negate:
        case Kind::exp:
        case Kind::log:
            return make(node_->kind, Expr(node_->lhs).substitute(replacement));
        default:
            return make(node_->kind, Expr(node_->lhs).substitute(replacement),
                        Expr(node_->rhs).substitute(replacement));
    }
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Binding strength used for parenthesization: additive 1, multiplicative 2,
// unary minus 3, power 4, atom 5.
int node_prec(Expr::Kind k) {
    switch (k) {
        case Expr::Kind::add:
        case Expr::Kind::sub: return 1;
        case Expr::Kind::mul:
        case Expr::Kind::div: return 2;
        case Expr::Kind::negate: return 3;
        case Expr::Kind::pow: return 4;
        default: return 5;
    }
}

void print_node(const Expr& e, int min_prec, std::string& out) {
    const int prec = node_prec(e.kind());
    const bool needs_paren = prec < min_prec;
    if (needs_paren) out += '(';
    switch (e.kind()) {
        case Expr::Kind::constant: {
            const double v = e.constant_value();
            if (v < 0.0 && !needs_paren && min_prec > 1) {
                // A negative literal in a tight context reparses as unary minus
                // applied too narrowly; parenthesize it.
                out += '(';
                out += format_double(v);
                out += ')';
                return;
            }
            out += format_double(v);
            return;
        }
        case Expr::Kind::variable: out += 'r'; return;
        case Expr::Kind::negate:
            out += '-';
            print_node(e.child(0), 3, out);
            break;
        case Expr::Kind::add:
            print_node(e.child(0), 1, out);
            out += " + ";
            print_node(e.child(1), 2, out);
            break;
        case Expr::Kind::sub:
            print_node(e.child(0), 1, out);
            out += " - ";
            print_node(e.child(1), 2, out);
            break;
        case Expr::Kind::mul:
            print_node(e.child(0), 2, out);
            out += "*";
            print_node(e.child(1), 3, out);
            break;
        case Expr::Kind::div:
            print_node(e.child(0), 2, out);
            out += "/";
            print_node(e.child(1), 3, out);
            break;
        case Expr::Kind::pow:
            print_node(e.child(0), 5, out);
            out += "^";
            print_node(e.child(1), 3, out);
            break;
        case Expr::Kind::exp:
            out += "exp(";
            print_node(e.child(0), 0, out);
            out += ')';
            break;
        case Expr::Kind::log:
            out += "log(";
            print_node(e.child(0), 0, out);
            out += ')';
            break;
    }
    if (needs_paren) out += ')';
}

}  // namespace

std::string Expr::str() const {
    std::string out;
    print_node(*this, 0, out);
    return out;
}

// ---------------------------------------------------------------------------
// Parsing: recursive descent.
//
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?          (right associative)
//   atom   := number | 'r' | ident '(' expr ')' | '(' expr ')'

namespace {

class Parser {
  public:
    explicit Parser(const std::string& text) : text_(text) {}

    Expr run() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("empty input", 0);
        Expr e = parse_expr();
        skip_ws();
        if (pos_ < text_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

  private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            if (accept('+'))
                e = e + parse_term();
            else if (accept('-'))
                e = e - parse_term();
            else
                return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_unary();
        for (;;) {
            if (accept('*'))
                e = e * parse_unary();
            else if (accept('/'))
                e = e / parse_unary();
            else
                return e;
        }
    }

    Expr parse_unary() {
        if (accept('-')) return -parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_atom();
        if (accept('^')) return pow(base, parse_unary());
        return base;
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr parse_number() {
        const char* start = text_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(start, &end);
        if (end == start) throw ParseError("malformed number", pos_);
        pos_ += static_cast<std::size_t>(end - start);
        return Expr::constant(v);
    }

    Expr parse_ident() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::string name = text_.substr(start, pos_ - start);
        if (name == "r") return Expr::variable();
        if (name == "exp" || name == "log") {
            if (!accept('(')) throw ParseError("expected '(' after function name", pos_);
            Expr arg = parse_expr();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return name == "exp" ? exp(arg) : log(arg);
        }
        throw ParseError("unknown identifier '" + name + "'", start);
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr Expr::parse(const std::string& text) { return Parser(text).run(); }

// ---------------------------------------------------------------------------
// Compilation to a postfix tape.

namespace {

int compile_node(const Expr& e, std::vector<CompiledExpr>::value_type*) = delete;

}  // namespace

CompiledExpr Expr::compile() const {
    CompiledExpr out;
    // Post-order walk without recursion depth concerns for typical densities.
    struct Frame {
        Expr node;
        int stage;
    };
    std::vector<Frame> stack{{*this, 0}};
    int depth = 0, max_depth = 0;
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        const Kind k = f.node.kind();
        const bool unary = (k == Kind::negate || k == Kind::exp || k == Kind::log);
        const bool leaf = (k == Kind::constant || k == Kind::variable);
        if (f.stage == 0 && !leaf) {
            stack.push_back({f.node, 1});
            if (!unary) stack.push_back({f.node.child(1), 0});
            stack.push_back({f.node.child(0), 0});
            continue;
        }
        CompiledExpr::Op op;
        double imm = 0.0;
        switch (k) {
            case Kind::constant:
                op = CompiledExpr::Op::push;
                imm = f.node.constant_value();
                ++depth;
                break;
            case Kind::variable:
                op = CompiledExpr::Op::var;
                ++depth;
                break;
            case Kind::negate: op = CompiledExpr::Op::neg; break;
            case Kind::exp: op = CompiledExpr::Op::exp; break;
            case Kind::log: op = CompiledExpr::Op::log; break;
            case Kind::add: op = CompiledExpr::Op::add; --depth; break;
            case Kind::sub: op = CompiledExpr::Op::sub; --depth; break;
            case Kind::mul: op = CompiledExpr::Op::mul; --depth; break;
            case Kind::div: op = CompiledExpr::Op::div; --depth; break;
            case Kind::pow: op = CompiledExpr::Op::pow; --depth; break;
            default: op = CompiledExpr::Op::push; break;
        }
        out.code_.push_back({op, imm});
        max_depth = std::max(max_depth, depth);
    }
    out.max_stack_ = max_depth;
    return out;
}

EvalResult CompiledExpr::try_eval(double r) const noexcept {
    double stack[64];
    if (max_stack_ > 64) return {0.0, EvalStatus::domain_error};
    int top = -1;
    for (const Instr& ins : code_) {
        switch (ins.op) {
            case Op::push: stack[++top] = ins.imm; break;
            case Op::var: stack[++top] = r; break;
            case Op::neg: stack[top] = -stack[top]; break;
            case Op::exp: {
                const double v = std::exp(stack[top]);
                if (!std::isfinite(v)) return {v, EvalStatus::overflow};
                stack[top] = v;
                break;
            }
            case Op::log: {
                if (stack[top] <= 0.0) return {0.0, EvalStatus::domain_error};
                stack[top] = std::log(stack[top]);
                break;
            }
            default: {
                const double b = stack[top--];
                const double a = stack[top];
                EvalResult res;
                switch (ins.op) {
                    case Op::add: res = {a + b, EvalStatus::ok}; break;
                    case Op::sub: res = {a - b, EvalStatus::ok}; break;
                    case Op::mul: res = {a * b, EvalStatus::ok}; break;
                    case Op::div: res = apply_binary(Expr::Kind::div, a, b); break;
                    case Op::pow: res = apply_binary(Expr::Kind::pow, a, b); break;
                    default: res = {0.0, EvalStatus::domain_error}; break;
                }
                if (!res.ok()) return res;
                if (!std::isfinite(res.value)) return {res.value, EvalStatus::overflow};
                stack[top] = res.value;
                break;
            }
        }
    }
    return {stack[0], EvalStatus::ok};
}

double CompiledExpr::operator()(double r) const noexcept {
    EvalResult res = try_eval(r);
    return res.ok() ? res.value : std::nan("");
}

}  // namespace isofiber

#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace isofiber {

/// Outcome of evaluating an expression at a point.
enum class EvalStatus : std::uint8_t {
    ok,
    domain_error,  // log of non-positive, fractional power of negative base
    singularity,   // division by zero, zero to a negative power
    overflow,      // finite inputs produced a non-finite value
};

struct EvalResult {
    double value = 0.0;
    EvalStatus status = EvalStatus::ok;

    bool ok() const { return status == EvalStatus::ok; }
};

class EvalError : public std::runtime_error {
  public:
    EvalError(EvalStatus status, double at);

    EvalStatus status;
    double at;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& message, std::size_t position);

    /// 0-based offset into the input text.
    std::size_t position;
};

/// Flat postfix program for fast repeated evaluation of an Expr.
class CompiledExpr {
  public:
    EvalResult try_eval(double r) const noexcept;
    double operator()(double r) const noexcept;  // NaN on any evaluation failure

  private:
    friend class Expr;
    enum class Op : std::uint8_t { push, var, neg, add, sub, mul, div, pow, exp, log };
    struct Instr {
        Op op;
        double imm;
    };
    std::vector<Instr> code_;
    int max_stack_ = 0;
};

/// Immutable scalar expression in the single variable `r`.
///
/// Supports +, -, *, /, ^ (right associative, fractional exponents only for
/// positive bases), exp and log. Construction folds constant subtrees; no
/// further simplification is performed.
class Expr {
  public:
    enum class Kind : std::uint8_t { constant, variable, negate, add, sub, mul, div, pow, exp, log };

    Expr();  // constant 0

    static Expr constant(double v);
    static Expr variable();

    /// Parses the expression grammar; throws ParseError with a position.
    static Expr parse(const std::string& text);

    Kind kind() const { return node_->kind; }
    double constant_value() const;  // valid when kind() == constant
    Expr child(int i) const;        // 0 = left/only child, 1 = right child

    /// Symbolic derivative with respect to r.
    Expr derivative() const;

    /// Replaces the variable with another expression.
    Expr substitute(const Expr& replacement) const;

    double eval(double r) const;  // throws EvalError
    EvalResult try_eval(double r) const noexcept;
    CompiledExpr compile() const;

    /// Prints with minimal parentheses; parse(str()) reproduces the tree.
    std::string str() const;

    bool equals(const Expr& other) const;
    bool is_constant(double v) const;

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);
    friend Expr pow(const Expr& base, const Expr& exponent);
    friend Expr exp(const Expr& arg);
    friend Expr log(const Expr& arg);

  private:
    struct Node {
        Kind kind;
        double value;  // constants only
        std::shared_ptr<const Node> lhs, rhs;
    };
    using NodePtr = std::shared_ptr<const Node>;

    explicit Expr(NodePtr node) : node_(std::move(node)) {}
    static Expr make(Kind kind, Expr a);
    static Expr make(Kind kind, Expr a, Expr b);

    NodePtr node_;
};

inline Expr pow(const Expr& base, double exponent) { return pow(base, Expr::constant(exponent)); }

/// An expression together with its first two symbolic derivatives.
struct DerivedExpr {
    Expr value;
    Expr first;
    Expr second;

    static DerivedExpr of(const Expr& e) { return {e, e.derivative(), e.derivative().derivative()}; }
};

}  // namespace isofiber

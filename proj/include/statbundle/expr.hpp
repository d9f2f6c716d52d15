#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "statbundle/hermite.hpp"
#include "statbundle/scalar_field.hpp"

namespace statbundle {

// Field expression grammar (whitespace insensitive):
//   expr   := term (("+" | "-") term)*
//   term   := factor (("*" | "/") factor)*
//   factor := "-" factor | atom ("^" INT)?
//   atom   := NUMBER | "x"INT | "H(" INT "," INT ")" | FUNC "(" expr ")" | "(" expr ")"
//   FUNC   := sin | cos | tanh | exp

enum class BinOp { Add, Sub, Mul, Div };
enum class FunKind { Sin, Cos, Tanh, Exp, Neg };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Tag { Num, Var, Hermite, Bin, Pow, Fun };

    Tag tag;
    double num = 0.0;   // Num
    int index = 0;      // Var / Hermite axis, 1-based
    int degree = 0;     // Hermite degree
    BinOp op{};         // Bin
    FunKind fun{};      // Fun
    int exponent = 0;   // Pow
    ExprPtr a, b;       // Bin: a,b; Pow/Fun: a
};

inline ExprPtr make_num(double v) {
    auto e = std::make_shared<Expr>();
    e->tag = Expr::Tag::Num;
    e->num = v;
    return e;
}
inline ExprPtr make_var(int i) {
    auto e = std::make_shared<Expr>();
    e->tag = Expr::Tag::Var;
    e->index = i;
    return e;
}
inline ExprPtr make_hermite(int k, int i) {
    auto e = std::make_shared<Expr>();
    e->tag = Expr::Tag::Hermite;
    e->degree = k;
    e->index = i;
    return e;
}
inline ExprPtr make_bin(BinOp op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->tag = Expr::Tag::Bin;
    e->op = op;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}
inline ExprPtr make_pow(ExprPtr base, int n) {
    auto e = std::make_shared<Expr>();
    e->tag = Expr::Tag::Pow;
    e->exponent = n;
    e->a = std::move(base);
    return e;
}
inline ExprPtr make_fun(FunKind f, ExprPtr arg) {
    // "-2" is a literal, not a negation node
    if (f == FunKind::Neg && arg->tag == Expr::Tag::Num) return make_num(-arg->num);
    auto e = std::make_shared<Expr>();
    e->tag = Expr::Tag::Fun;
    e->fun = f;
    e->a = std::move(arg);
    return e;
}

inline bool expr_equal(const ExprPtr& x, const ExprPtr& y) {
    if (x->tag != y->tag) return false;
    switch (x->tag) {
        case Expr::Tag::Num: return x->num == y->num;
        case Expr::Tag::Var: return x->index == y->index;
        case Expr::Tag::Hermite: return x->degree == y->degree && x->index == y->index;
        case Expr::Tag::Bin: return x->op == y->op && expr_equal(x->a, y->a) && expr_equal(x->b, y->b);
        case Expr::Tag::Pow: return x->exponent == y->exponent && expr_equal(x->a, y->a);
        case Expr::Tag::Fun: return x->fun == y->fun && expr_equal(x->a, y->a);
    }
    return false;
}

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), position_(pos) {}
    size_t position() const { return position_; }

private:
    size_t position_;
};

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

class Parser {
public:
    Parser(std::string_view src, int dim) : src_(src), dim_(dim) {}

    ExprPtr run() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
        ExprPtr e = expr();
        skip_ws();
        if (pos_ < src_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }
    bool accept(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c, const char* what) {
        if (!accept(c)) throw ParseError(std::string("expected '") + c + "' in " + what, pos_);
    }

    ExprPtr expr() {
        ExprPtr e = term();
        while (true) {
            if (accept('+')) e = make_bin(BinOp::Add, e, term());
            else if (accept('-')) e = make_bin(BinOp::Sub, e, term());
            else return e;
        }
    }

    ExprPtr term() {
        ExprPtr e = factor();
        while (true) {
            if (accept('*')) e = make_bin(BinOp::Mul, e, factor());
            else if (accept('/')) e = make_bin(BinOp::Div, e, factor());
            else return e;
        }
    }

    ExprPtr factor() {
        if (accept('-')) return make_fun(FunKind::Neg, factor());
        ExprPtr e = atom();
        if (accept('^')) {
            const size_t at = pos_;
            const int n = integer("exponent");
            if (n < 0) throw ParseError("negative exponent", at);
            return make_pow(e, n);
        }
        return e;
    }

    ExprPtr atom() {
        const char c = peek();
        const size_t at = pos_;
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return make_num(number());
        if (accept('(')) {
            ExprPtr e = expr();
            expect(')', "parenthesized expression");
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::string id = identifier();
            if (id == "H") {
                expect('(', "Hermite atom");
                const size_t kat = pos_;
                const int k = integer("Hermite degree");
                if (k < 0) throw ParseError("Hermite degree must be non-negative", kat);
                expect(',', "Hermite atom");
                const size_t iat = pos_;
                const int i = integer("Hermite axis");
                if (i < 1 || i > dim_) throw ParseError("Hermite axis out of range", iat);
                expect(')', "Hermite atom");
                return make_hermite(k, i);
            }
            if (id == "sin" || id == "cos" || id == "tanh" || id == "exp") {
                expect('(', "function call");
                ExprPtr arg = expr();
                expect(')', "function call");
                const FunKind f = id == "sin"    ? FunKind::Sin
                                  : id == "cos"  ? FunKind::Cos
                                  : id == "tanh" ? FunKind::Tanh
                                                 : FunKind::Exp;
                return make_fun(f, arg);
            }
            if (id.size() > 1 && id[0] == 'x') {
                int v = 0;
                for (size_t j = 1; j < id.size(); ++j) {
                    if (!std::isdigit(static_cast<unsigned char>(id[j])))
                        throw ParseError("unknown identifier '" + id + "'", at);
                    v = v * 10 + (id[j] - '0');
                }
                if (v < 1 || v > dim_) throw ParseError("variable index out of range", at);
                return make_var(v);
            }
            throw ParseError("unknown identifier '" + id + "'", at);
        }
        throw ParseError("unexpected character", at);
    }

    std::string identifier() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        return std::string(src_.substr(start, pos_ - start));
    }

    int integer(const char* what) {
        skip_ws();
        size_t start = pos_;
        if (pos_ < src_.size() && src_[pos_] == '-') ++pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ == start || (src_[start] == '-' && pos_ == start + 1))
            throw ParseError(std::string("expected integer ") + what, start);
        return std::stoi(std::string(src_.substr(start, pos_ - start)));
    }

    double number() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            } else {
                pos_ = save;  // 'e' belongs to a following identifier, not this literal
            }
        }
        if (pos_ == start) throw ParseError("malformed number", start);
        try {
            return std::stod(std::string(src_.substr(start, pos_ - start)));
        } catch (const std::exception&) {
            throw ParseError("malformed number", start);
        }
    }

    std::string_view src_;
    int dim_;
    size_t pos_ = 0;
};

inline int precedence(const Expr& e) {
    switch (e.tag) {
        case Expr::Tag::Bin: return (e.op == BinOp::Add || e.op == BinOp::Sub) ? 1 : 2;
        case Expr::Tag::Fun: return e.fun == FunKind::Neg ? 3 : 5;
        case Expr::Tag::Pow: return 4;
        case Expr::Tag::Num: return e.num < 0 ? 3 : 5;
        default: return 5;
    }
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void print_rec(const ExprPtr& e, int parent_prec, std::string& out) {
    const int prec = precedence(*e);
    const bool parens = prec < parent_prec;
    if (parens) out += '(';
    switch (e->tag) {
        case Expr::Tag::Num: out += format_double(e->num); break;
        case Expr::Tag::Var: out += "x" + std::to_string(e->index); break;
        case Expr::Tag::Hermite:
            out += "H(" + std::to_string(e->degree) + "," + std::to_string(e->index) + ")";
            break;
        case Expr::Tag::Bin: {
            const char* ops[] = {"+", "-", "*", "/"};
            print_rec(e->a, prec, out);
            out += ops[static_cast<int>(e->op)];
            // - and / are left-associative: parenthesize a same-precedence right child
            print_rec(e->b, prec + 1, out);
            break;
        }
        case Expr::Tag::Pow:
            print_rec(e->a, prec + 1, out);
            out += "^" + std::to_string(e->exponent);
            break;
        case Expr::Tag::Fun: {
            if (e->fun == FunKind::Neg) {
                out += "-";
                print_rec(e->a, prec, out);
            } else {
                const char* names[] = {"sin", "cos", "tanh", "exp"};
                out += names[static_cast<int>(e->fun)];
                out += "(";
                print_rec(e->a, 0, out);
                out += ")";
            }
            break;
        }
    }
    if (parens) out += ')';
}

}  // namespace detail

inline ExprPtr parse_expr(std::string_view src, int dim) { return detail::Parser(src, dim).run(); }

inline std::string print_expr(const ExprPtr& e) {
    std::string out;
    detail::print_rec(e, 0, out);
    return out;
}

inline double eval_expr(const ExprPtr& e, std::span<const double> x) {
    switch (e->tag) {
        case Expr::Tag::Num: return e->num;
        case Expr::Tag::Var: return x[static_cast<size_t>(e->index - 1)];
        case Expr::Tag::Hermite: return hermite_value(e->degree, x[static_cast<size_t>(e->index - 1)]);
        case Expr::Tag::Bin: {
            const double a = eval_expr(e->a, x);
            const double b = eval_expr(e->b, x);
            switch (e->op) {
                case BinOp::Add: return a + b;
                case BinOp::Sub: return a - b;
                case BinOp::Mul: return a * b;
                default:
                    if (b == 0.0) throw EvalError("division by zero while evaluating field");
                    return a / b;
            }
        }
        case Expr::Tag::Pow: {
            const double a = eval_expr(e->a, x);
            double r = 1.0;
            for (int i = 0; i < e->exponent; ++i) r *= a;
            return r;
        }
        case Expr::Tag::Fun: {
            const double a = eval_expr(e->a, x);
            switch (e->fun) {
                case FunKind::Sin: return std::sin(a);
                case FunKind::Cos: return std::cos(a);
                case FunKind::Tanh: return std::tanh(a);
                case FunKind::Exp: return std::exp(a);
                default: return -a;
            }
        }
    }
    throw EvalError("corrupt expression node");
}

/// Minimal simplifier: constant folding plus the identity rules
/// 0+e, e+0, e-0, 0*e, 1*e, e*1, e/1, e^0, e^1, -(-e).
inline ExprPtr simplify(const ExprPtr& e) {
    const auto is_const = [](const ExprPtr& p, double v) {
        return p->tag == Expr::Tag::Num && p->num == v;
    };
    switch (e->tag) {
        case Expr::Tag::Num:
        case Expr::Tag::Var:
        case Expr::Tag::Hermite: return e;
        case Expr::Tag::Bin: {
            ExprPtr a = simplify(e->a);
            ExprPtr b = simplify(e->b);
            if (a->tag == Expr::Tag::Num && b->tag == Expr::Tag::Num) {
                switch (e->op) {
                    case BinOp::Add: return make_num(a->num + b->num);
                    case BinOp::Sub: return make_num(a->num - b->num);
                    case BinOp::Mul: return make_num(a->num * b->num);
                    default:
                        if (b->num != 0.0) return make_num(a->num / b->num);
                        break;
                }
            }
            switch (e->op) {
                case BinOp::Add:
                    if (is_const(a, 0.0)) return b;
                    if (is_const(b, 0.0)) return a;
                    break;
                case BinOp::Sub:
                    if (is_const(b, 0.0)) return a;
                    if (is_const(a, 0.0)) return make_fun(FunKind::Neg, b);
                    break;
                case BinOp::Mul:
                    if (is_const(a, 0.0) || is_const(b, 0.0)) return make_num(0.0);
                    if (is_const(a, 1.0)) return b;
                    if (is_const(b, 1.0)) return a;
                    break;
                case BinOp::Div:
                    if (is_const(b, 1.0)) return a;
                    break;
            }
            return make_bin(e->op, a, b);
        }
        case Expr::Tag::Pow: {
            ExprPtr a = simplify(e->a);
            if (e->exponent == 0) return make_num(1.0);
            if (e->exponent == 1) return a;
            if (a->tag == Expr::Tag::Num) {
                double r = 1.0;
                for (int i = 0; i < e->exponent; ++i) r *= a->num;
                return make_num(r);
            }
            return make_pow(a, e->exponent);
        }
        case Expr::Tag::Fun: {
            ExprPtr a = simplify(e->a);
            if (e->fun == FunKind::Neg && a->tag == Expr::Tag::Fun && a->fun == FunKind::Neg) return a->a;
            if (a->tag == Expr::Tag::Num) {
                switch (e->fun) {
                    case FunKind::Sin: return make_num(std::sin(a->num));
                    case FunKind::Cos: return make_num(std::cos(a->num));
                    case FunKind::Tanh: return make_num(std::tanh(a->num));
                    case FunKind::Exp: return make_num(std::exp(a->num));
                    case FunKind::Neg: return make_num(-a->num);
                }
            }
            return make_fun(e->fun, a);
        }
    }
    return e;
}

/// Symbolic d/dx_i (axis 1-based).  Hermite atoms use the lowering rule
/// dH(k,i)/dx_i = k H(k-1,i).
inline ExprPtr differentiate(const ExprPtr& e, int axis) {
    switch (e->tag) {
        case Expr::Tag::Num: return make_num(0.0);
        case Expr::Tag::Var: return make_num(e->index == axis ? 1.0 : 0.0);
        case Expr::Tag::Hermite:
            if (e->index != axis || e->degree == 0) return make_num(0.0);
            return simplify(make_bin(BinOp::Mul, make_num(e->degree), make_hermite(e->degree - 1, e->index)));
        case Expr::Tag::Bin: {
            ExprPtr da = differentiate(e->a, axis);
            ExprPtr db = differentiate(e->b, axis);
            switch (e->op) {
                case BinOp::Add: return simplify(make_bin(BinOp::Add, da, db));
                case BinOp::Sub: return simplify(make_bin(BinOp::Sub, da, db));
                case BinOp::Mul:
                    return simplify(make_bin(BinOp::Add, make_bin(BinOp::Mul, da, e->b),
                                             make_bin(BinOp::Mul, e->a, db)));
                default:
                    return simplify(make_bin(
                        BinOp::Div,
                        make_bin(BinOp::Sub, make_bin(BinOp::Mul, da, e->b), make_bin(BinOp::Mul, e->a, db)),
                        make_pow(e->b, 2)));
            }
        }
        case Expr::Tag::Pow: {
            ExprPtr da = differentiate(e->a, axis);
            if (e->exponent == 0) return make_num(0.0);
            return simplify(make_bin(
                BinOp::Mul, make_bin(BinOp::Mul, make_num(e->exponent), make_pow(e->a, e->exponent - 1)),
                da));
        }
        case Expr::Tag::Fun: {
            ExprPtr da = differentiate(e->a, axis);
            switch (e->fun) {
                case FunKind::Sin: return simplify(make_bin(BinOp::Mul, make_fun(FunKind::Cos, e->a), da));
                case FunKind::Cos:
                    return simplify(
                        make_bin(BinOp::Mul, make_fun(FunKind::Neg, make_fun(FunKind::Sin, e->a)), da));
                case FunKind::Tanh:
                    return simplify(make_bin(
                        BinOp::Mul,
                        make_bin(BinOp::Sub, make_num(1.0), make_pow(make_fun(FunKind::Tanh, e->a), 2)), da));
                case FunKind::Exp: return simplify(make_bin(BinOp::Mul, make_fun(FunKind::Exp, e->a), da));
                default: return simplify(make_fun(FunKind::Neg, da));
            }
        }
    }
    return make_num(0.0);
}

/// Monomial expansion when the tree is a polynomial; degrees above `cap` bail out.
inline std::optional<std::map<MultiIndex, double>> expand_polynomial(const ExprPtr& e, int dim,
                                                                     int cap = 8) {
    using Mono = std::map<MultiIndex, double>;
    const auto degree_of = [](const Mono& m) {
        int d = 0;
        for (const auto& [k, v] : m)
            if (v != 0.0) d = std::max(d, k.order());
        return d;
    };
    const auto mul = [&](const Mono& a, const Mono& b) -> std::optional<Mono> {
        Mono r;
        for (const auto& [ka, va] : a)
            for (const auto& [kb, vb] : b) {
                auto ent = ka.entries();
                for (int i = 0; i < dim; ++i) ent[static_cast<size_t>(i)] += kb[i];
                r[MultiIndex(ent)] += va * vb;
            }
        if (degree_of(r) > cap) return std::nullopt;
        return r;
    };
    switch (e->tag) {
        case Expr::Tag::Num: return Mono{{MultiIndex::zero(dim), e->num}};
        case Expr::Tag::Var: {
            std::vector<int> ent(static_cast<size_t>(dim), 0);
            ent[static_cast<size_t>(e->index - 1)] = 1;
            return Mono{{MultiIndex(ent), 1.0}};
        }
        case Expr::Tag::Hermite: {
            const auto cs = hermite_monomial_coeffs(e->degree);
            if (static_cast<int>(cs.size()) - 1 > cap) return std::nullopt;
            Mono r;
            for (size_t d = 0; d < cs.size(); ++d) {
                if (cs[d] == 0.0) continue;
                std::vector<int> ent(static_cast<size_t>(dim), 0);
                ent[static_cast<size_t>(e->index - 1)] = static_cast<int>(d);
                r[MultiIndex(ent)] += cs[d];
            }
            return r;
        }
        case Expr::Tag::Bin: {
            auto a = expand_polynomial(e->a, dim, cap);
            auto b = expand_polynomial(e->b, dim, cap);
            if (!a || !b) return std::nullopt;
            switch (e->op) {
                case BinOp::Add: {
                    for (const auto& [k, v] : *b) (*a)[k] += v;
                    return a;
                }
                case BinOp::Sub: {
                    for (const auto& [k, v] : *b) (*a)[k] -= v;
                    return a;
                }
                case BinOp::Mul: return mul(*a, *b);
                default: return std::nullopt;
            }
        }
        case Expr::Tag::Pow: {
            auto a = expand_polynomial(e->a, dim, cap);
            if (!a) return std::nullopt;
            Mono r{{MultiIndex::zero(dim), 1.0}};
            for (int i = 0; i < e->exponent; ++i) {
                auto next = mul(r, *a);
                if (!next) return std::nullopt;
                r = std::move(*next);
            }
            return r;
        }
        case Expr::Tag::Fun:
            if (e->fun == FunKind::Neg) {
                auto a = expand_polynomial(e->a, dim, cap);
                if (!a) return std::nullopt;
                for (auto& [k, v] : *a) v = -v;
                return a;
            }
            return std::nullopt;
    }
    return std::nullopt;
}

namespace detail {

/// Sup bound for trees built from bounded atoms under +, -, * and powers.
inline std::optional<double> bounded_bound(const ExprPtr& e) {
    switch (e->tag) {
        case Expr::Tag::Num: return std::abs(e->num);
        case Expr::Tag::Fun:
            if (e->fun == FunKind::Sin || e->fun == FunKind::Cos || e->fun == FunKind::Tanh) return 1.0;
            if (e->fun == FunKind::Neg) return bounded_bound(e->a);
            return std::nullopt;
        case Expr::Tag::Bin: {
            if (e->op == BinOp::Div) return std::nullopt;
            auto a = bounded_bound(e->a);
            auto b = bounded_bound(e->b);
            if (!a || !b) return std::nullopt;
            return e->op == BinOp::Mul ? (*a) * (*b) : (*a) + (*b);
        }
        case Expr::Tag::Pow: {
            auto a = bounded_bound(e->a);
            if (!a) return std::nullopt;
            return std::pow(*a, e->exponent);
        }
        default: return std::nullopt;
    }
}

}  // namespace detail

inline Certificate certify(const ExprPtr& e, int dim);

namespace detail {

/// Splits over +/-/negation/literal scaling so that sums of bounded and
/// quadratic parts certify as a whole.
inline Certificate additive_certificate(const ExprPtr& e, int dim) {
    if (e->tag == Expr::Tag::Bin && (e->op == BinOp::Add || e->op == BinOp::Sub)) {
        Certificate a = additive_certificate(e->a, dim);
        Certificate b = additive_certificate(e->b, dim);
        return Certificate::sum(a, e->op == BinOp::Sub ? b.scaled(-1.0) : b);
    }
    if (e->tag == Expr::Tag::Fun && e->fun == FunKind::Neg)
        return additive_certificate(e->a, dim).scaled(-1.0);
    if (e->tag == Expr::Tag::Bin && e->op == BinOp::Mul) {
        if (e->a->tag == Expr::Tag::Num) return additive_certificate(e->b, dim).scaled(e->a->num);
        if (e->b->tag == Expr::Tag::Num) return additive_certificate(e->a, dim).scaled(e->b->num);
    }
    if (auto b = bounded_bound(e)) return Certificate::bounded(*b);
    if (auto mono = expand_polynomial(e, dim)) return certificate_from_monomials(dim, *mono);
    return Certificate::unbounded();
}

}  // namespace detail

/// Growth certificate of an expression: bounded combinations of sin/cos/tanh
/// and literals, polynomials of total degree <= 2, sums of the two, or
/// unbounded.  exp-bearing trees are always marked unbounded, which excludes
/// them from exponential tilts.
inline Certificate certify(const ExprPtr& e, int dim) {
    if (auto b = detail::bounded_bound(e)) return Certificate::bounded(*b);
    if (auto mono = expand_polynomial(e, dim)) return certificate_from_monomials(dim, *mono);
    return detail::additive_certificate(e, dim);
}

/// ScalarField backed by an expression tree.  First and second derivatives are
/// differentiated symbolically at construction, so gradients and Hessians are
/// exact.
class ExprField final : public ScalarField {
public:
    ExprField(ExprPtr root, int dim) : dim_(dim), root_(std::move(root)) {
        grads_.reserve(static_cast<size_t>(dim_));
        for (int i = 1; i <= dim_; ++i) grads_.push_back(differentiate(root_, i));
        hess_.reserve(static_cast<size_t>(dim_ * dim_));
        for (int i = 1; i <= dim_; ++i)
            for (int j = 1; j <= dim_; ++j) hess_.push_back(differentiate(grads_[static_cast<size_t>(i - 1)], j));
    }
    ExprField(std::string_view src, int dim) : ExprField(parse_expr(src, dim), dim) {}

    int dim() const override { return dim_; }
    const ExprPtr& root() const { return root_; }

    double value(std::span<const double> x) const override { return eval_expr(root_, x); }
    void gradient(std::span<const double> x, std::span<double> out) const override {
        for (int i = 0; i < dim_; ++i) out[static_cast<size_t>(i)] = eval_expr(grads_[static_cast<size_t>(i)], x);
    }
    void hessian(std::span<const double> x, std::span<double> out) const override {
        for (size_t k = 0; k < hess_.size(); ++k) out[k] = eval_expr(hess_[k], x);
    }
    bool has_exact_gradient() const override { return true; }
    Certificate certificate() const override { return certify(root_, dim_); }
    std::optional<std::string> fieldspec() const override { return print_expr(root_); }

private:
    int dim_;
    ExprPtr root_;
    std::vector<ExprPtr> grads_;
    std::vector<ExprPtr> hess_;
};

inline std::shared_ptr<const ExprField> parse_field(std::string_view src, int dim) {
    return std::make_shared<ExprField>(src, dim);
}

/// Sum that preserves a printable representation when both operands have one.
inline FieldPtr field_sum(const FieldPtr& a, const FieldPtr& b) {
    if (auto ea = std::dynamic_pointer_cast<const ExprField>(a)) {
        if (auto eb = std::dynamic_pointer_cast<const ExprField>(b))
            return std::make_shared<ExprField>(simplify(make_bin(BinOp::Add, ea->root(), eb->root())), a->dim());
    }
    if (auto ha = std::dynamic_pointer_cast<const HermiteField>(a)) {
        if (auto hb = std::dynamic_pointer_cast<const HermiteField>(b))
            return std::make_shared<HermiteField>(*ha + *hb);
    }
    return lambda_sum(a, b);
}

/// f + c, preserving printability; consecutive constant shifts fold into one
/// term, printed as a subtraction when negative.
inline FieldPtr field_shift(const FieldPtr& a, double c) {
    if (c == 0.0) return a;
    if (auto ea = std::dynamic_pointer_cast<const ExprField>(a)) {
        ExprPtr body = ea->root();
        if (body->tag == Expr::Tag::Bin && body->b->tag == Expr::Tag::Num) {
            if (body->op == BinOp::Add) {
                c += body->b->num;
                body = body->a;
            } else if (body->op == BinOp::Sub) {
                c -= body->b->num;
                body = body->a;
            }
        }
        ExprPtr shifted = c >= 0.0 ? make_bin(BinOp::Add, body, make_num(c))
                                   : make_bin(BinOp::Sub, body, make_num(-c));
        return std::make_shared<ExprField>(simplify(shifted), a->dim());
    }
    if (auto ha = std::dynamic_pointer_cast<const HermiteField>(a)) {
        HermiteField r = *ha;
        r.add(MultiIndex::zero(a->dim()), c);
        return std::make_shared<HermiteField>(std::move(r));
    }
    return lambda_shift(a, c);
}

inline FieldPtr field_scale(const FieldPtr& a, double c) {
    if (auto ea = std::dynamic_pointer_cast<const ExprField>(a))
        return std::make_shared<ExprField>(simplify(make_bin(BinOp::Mul, make_num(c), ea->root())), a->dim());
    if (auto ha = std::dynamic_pointer_cast<const HermiteField>(a))
        return std::make_shared<HermiteField>(*ha * c);
    return lambda_scale(a, c);
}

}  // namespace statbundle

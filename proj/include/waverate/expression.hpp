#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace waverate {

// Errors carry the byte offset into the source text where parsing failed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Arithmetic expressions in one real variable `x`.
//
// Grammar (highest precedence first):
//   power   :=  primary [ '^' [-]integer ]
//   factor  :=  '-' factor | power
//   term    :=  factor (('*' | '/') factor)*
//   expr    :=  term (('+' | '-') term)*
//   primary :=  number | 'x' | fn '(' expr [',' expr] ')' | '(' expr ')'
//
// Functions: sin, cos, exp, tanh, abs (unary); min, max (binary).
// Immutable after construction; eval() is pure and reentrant.
class Expression {
public:
    static Expression parse(std::string_view src) {
        Parser p{src, 0};
        if (src.empty()) throw ParseError("empty expression", 0);
        Expression e;
        e.root_ = p.parse_expr(e.nodes_);
        p.skip_ws();
        if (p.pos != src.size()) throw ParseError("trailing input", p.pos);
        return e;
    }

    double eval(double x) const {
        double v = eval_node(root_, x);
        if (!std::isfinite(v)) throw EvalError("overflow in expression evaluation");
        return v;
    }

    // Central difference, used where a slope of b or sigma is needed.
    // Step ~ cbrt(eps) scaled keeps the truncation and rounding errors balanced.
    double derivative(double x) const {
        double h = 6.0554544523933429e-6 * std::max(1.0, std::fabs(x));
        return (eval(x + h) - eval(x - h)) / (2.0 * h);
    }

    std::string to_string() const { return print_node(root_); }

private:
    enum class Kind { Num, Var, Add, Sub, Mul, Div, Neg, Pow, Fn1, Fn2 };
    enum class Fn { Sin, Cos, Exp, Tanh, Abs, Min, Max };

    struct Node {
        Kind kind;
        double num = 0.0;
        int a = -1;
        int b = -1;
        int ipow = 0;
        Fn fn = Fn::Sin;
    };

    std::vector<Node> nodes_;
    int root_ = -1;

    double eval_node(int idx, double x) const {
        const Node& n = nodes_[idx];
        switch (n.kind) {
            case Kind::Num: return n.num;
            case Kind::Var: return x;
            case Kind::Add: return eval_node(n.a, x) + eval_node(n.b, x);
            case Kind::Sub: return eval_node(n.a, x) - eval_node(n.b, x);
            case Kind::Mul: return eval_node(n.a, x) * eval_node(n.b, x);
            case Kind::Div: {
                double den = eval_node(n.b, x);
                if (den == 0.0) throw EvalError("division by zero");
                return eval_node(n.a, x) / den;
            }
            case Kind::Neg: return -eval_node(n.a, x);
            case Kind::Pow: {
                double base = eval_node(n.a, x);
                int k = n.ipow;
                bool inv = k < 0;
                unsigned uk = static_cast<unsigned>(inv ? -static_cast<long long>(k) : k);
                double r = 1.0;
                double b = base;
                while (uk) {
                    if (uk & 1u) r *= b;
                    b *= b;
                    uk >>= 1;
                }
                if (inv) {
                    if (r == 0.0) throw EvalError("division by zero");
                    return 1.0 / r;
                }
                return r;
            }
            case Kind::Fn1: {
                double v = eval_node(n.a, x);
                switch (n.fn) {
                    case Fn::Sin: return std::sin(v);
                    case Fn::Cos: return std::cos(v);
                    case Fn::Exp: {
                        double r = std::exp(v);
                        if (!std::isfinite(r)) throw EvalError("overflow in exp");
                        return r;
                    }
                    case Fn::Tanh: return std::tanh(v);
                    case Fn::Abs: return std::fabs(v);
                    default: break;
                }
                throw EvalError("bad unary function");
            }
            case Kind::Fn2: {
                double u = eval_node(n.a, x);
                double v = eval_node(n.b, x);
                return n.fn == Fn::Min ? std::fmin(u, v) : std::fmax(u, v);
            }
        }
        throw EvalError("bad node");
    }

    std::string print_node(int idx) const {
        const Node& n = nodes_[idx];
        char buf[40];
        switch (n.kind) {
            case Kind::Num:
                std::snprintf(buf, sizeof buf, "%.17g", n.num);
                return buf;
            case Kind::Var: return "x";
            case Kind::Add: return "(" + print_node(n.a) + " + " + print_node(n.b) + ")";
            case Kind::Sub: return "(" + print_node(n.a) + " - " + print_node(n.b) + ")";
            case Kind::Mul: return "(" + print_node(n.a) + " * " + print_node(n.b) + ")";
            case Kind::Div: return "(" + print_node(n.a) + " / " + print_node(n.b) + ")";
            case Kind::Neg: return "(-" + print_node(n.a) + ")";
            case Kind::Pow:
                return "(" + print_node(n.a) + ")^" + std::to_string(n.ipow);
            case Kind::Fn1: {
                const char* name = n.fn == Fn::Sin    ? "sin"
                                   : n.fn == Fn::Cos  ? "cos"
                                   : n.fn == Fn::Exp  ? "exp"
                                   : n.fn == Fn::Tanh ? "tanh"
                                                      : "abs";
                return std::string(name) + "(" + print_node(n.a) + ")";
            }
            case Kind::Fn2: {
                const char* name = n.fn == Fn::Min ? "min" : "max";
                return std::string(name) + "(" + print_node(n.a) + ", " + print_node(n.b) + ")";
            }
        }
        return "?";
    }

    struct Parser {
        std::string_view src;
        std::size_t pos;

        void skip_ws() {
            while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t')) ++pos;
        }
        bool peek(char c) {
            skip_ws();
            return pos < src.size() && src[pos] == c;
        }
        bool accept(char c) {
            if (peek(c)) {
                ++pos;
                return true;
            }
            return false;
        }
        void expect(char c) {
            if (!accept(c))
                throw ParseError(std::string("expected '") + c + "'", pos);
        }

        int parse_expr(std::vector<Node>& ns) {
            int lhs = parse_term(ns);
            for (;;) {
                if (accept('+')) {
                    int rhs = parse_term(ns);
                    lhs = push(ns, {Kind::Add, 0.0, lhs, rhs});
                } else if (accept('-')) {
                    int rhs = parse_term(ns);
                    lhs = push(ns, {Kind::Sub, 0.0, lhs, rhs});
                } else {
                    return lhs;
                }
            }
        }

        int parse_term(std::vector<Node>& ns) {
            int lhs = parse_factor(ns);
            for (;;) {
                if (accept('*')) {
                    int rhs = parse_factor(ns);
                    lhs = push(ns, {Kind::Mul, 0.0, lhs, rhs});
                } else if (accept('/')) {
                    int rhs = parse_factor(ns);
                    lhs = push(ns, {Kind::Div, 0.0, lhs, rhs});
                } else {
                    return lhs;
                }
            }
        }

        int parse_factor(std::vector<Node>& ns) {
            if (accept('-')) {
                int a = parse_factor(ns);
                return push(ns, {Kind::Neg, 0.0, a});
            }
            return parse_power(ns);
        }

        int parse_power(std::vector<Node>& ns) {
            int base = parse_primary(ns);
            if (accept('^')) {
                skip_ws();
                std::size_t start = pos;
                bool neg = false;
                if (pos < src.size() && src[pos] == '-') {
                    neg = true;
                    ++pos;
                }
                if (pos >= src.size() || !std::isdigit(static_cast<unsigned char>(src[pos])))
                    throw ParseError("integer exponent expected", start);
                long k = 0;
                while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
                    k = k * 10 + (src[pos] - '0');
                    if (k > 1000) throw ParseError("exponent too large", start);
                    ++pos;
                }
                Node n{Kind::Pow, 0.0, base};
                n.ipow = static_cast<int>(neg ? -k : k);
                return push(ns, n);
            }
            return base;
        }

        int parse_primary(std::vector<Node>& ns) {
            skip_ws();
            if (pos >= src.size()) throw ParseError("unexpected end of input", pos);
            char c = src[pos];
            if (c == '(') {
                ++pos;
                int e = parse_expr(ns);
                expect(')');
                return e;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const char* begin = src.data() + pos;
                char* end = nullptr;
                double v = std::strtod(begin, &end);
                if (end == begin) throw ParseError("bad number", pos);
                pos += static_cast<std::size_t>(end - begin);
                return push(ns, {Kind::Num, v});
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                std::size_t start = pos;
                while (pos < src.size() &&
                       std::isalpha(static_cast<unsigned char>(src[pos])))
                    ++pos;
                std::string_view name = src.substr(start, pos - start);
                if (name == "x") return push(ns, {Kind::Var});
                Fn fn;
                int arity = 1;
                if (name == "sin") fn = Fn::Sin;
                else if (name == "cos") fn = Fn::Cos;
                else if (name == "exp") fn = Fn::Exp;
                else if (name == "tanh") fn = Fn::Tanh;
                else if (name == "abs") fn = Fn::Abs;
                else if (name == "min") { fn = Fn::Min; arity = 2; }
                else if (name == "max") { fn = Fn::Max; arity = 2; }
                else throw ParseError("unknown identifier '" + std::string(name) + "'", start);
                expect('(');
                int a = parse_expr(ns);
                if (arity == 2) {
                    if (!accept(','))
                        throw ParseError("function expects two arguments", pos);
                    int b = parse_expr(ns);
                    expect(')');
                    Node n{Kind::Fn2, 0.0, a, b};
                    n.fn = fn;
                    return push(ns, n);
                }
                if (peek(','))
                    throw ParseError("function expects one argument", pos);
                expect(')');
                Node n{Kind::Fn1, 0.0, a};
                n.fn = fn;
                return push(ns, n);
            }
            throw ParseError("unexpected character", pos);
        }

        static int push(std::vector<Node>& ns, Node n) {
            ns.push_back(n);
            return static_cast<int>(ns.size() - 1);
        }
    };
};

} // namespace waverate

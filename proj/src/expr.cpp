#include "specdegen/expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "specdegen/errors.hpp"

namespace specdegen {

enum class Op { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sqrt };

struct Expr::Node {
    Op op;
    double value = 0.0;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodeP = std::shared_ptr<const Expr::Node>;

NodeP num(double v) { return std::make_shared<const Expr::Node>(Expr::Node{Op::Num, v, nullptr, nullptr}); }
NodeP var() { return std::make_shared<const Expr::Node>(Expr::Node{Op::Var, 0.0, nullptr, nullptr}); }

bool is_num(const NodeP& n, double v) { return n->op == Op::Num && n->value == v; }

NodeP mk(Op op, NodeP a, NodeP b = nullptr) {
    // light constant folding keeps derivative trees small
    if (a->op == Op::Num && (!b || b->op == Op::Num)) {
        double x = a->value, y = b ? b->value : 0.0;
        switch (op) {
            case Op::Add: return num(x + y);
            case Op::Sub: return num(x - y);
            case Op::Mul: return num(x * y);
            case Op::Div: return num(x / y);
            case Op::Pow: return num(std::pow(x, y));
            case Op::Neg: return num(-x);
            case Op::Exp: return num(std::exp(x));
            case Op::Log: return num(std::log(x));
            case Op::Sqrt: return num(std::sqrt(x));
            default: break;
        }
    }
    switch (op) {
        case Op::Add:
            if (is_num(a, 0)) return b;
            if (is_num(b, 0)) return a;
            break;
        case Op::Sub:
            if (is_num(b, 0)) return a;
            if (is_num(a, 0)) return mk(Op::Neg, b);
            break;
        case Op::Mul:
            if (is_num(a, 0) || is_num(b, 0)) return num(0);
            if (is_num(a, 1)) return b;
            if (is_num(b, 1)) return a;
            break;
        case Op::Div:
            if (is_num(a, 0)) return num(0);
            if (is_num(b, 1)) return a;
            break;
        case Op::Pow:
            if (is_num(b, 1)) return a;
            if (is_num(b, 0)) return num(1);
            break;
        default: break;
    }
    return std::make_shared<const Expr::Node>(Expr::Node{op, 0.0, std::move(a), std::move(b)});
}

double eval(const Expr::Node& n, double x) {
    switch (n.op) {
        case Op::Num: return n.value;
        case Op::Var: return x;
        case Op::Add: return eval(*n.a, x) + eval(*n.b, x);
        case Op::Sub: return eval(*n.a, x) - eval(*n.b, x);
        case Op::Mul: return eval(*n.a, x) * eval(*n.b, x);
        case Op::Div: return eval(*n.a, x) / eval(*n.b, x);
        case Op::Pow: return std::pow(eval(*n.a, x), eval(*n.b, x));
        case Op::Neg: return -eval(*n.a, x);
        case Op::Exp: return std::exp(eval(*n.a, x));
        case Op::Log: return std::log(eval(*n.a, x));
        case Op::Sqrt: return std::sqrt(eval(*n.a, x));
    }
    return NAN;
}

bool has_var(const NodeP& n) {
    if (!n) return false;
    if (n->op == Op::Var) return true;
    return has_var(n->a) || has_var(n->b);
}

NodeP diff(const NodeP& n) {
    switch (n->op) {
        case Op::Num: return num(0);
        case Op::Var: return num(1);
        case Op::Add: return mk(Op::Add, diff(n->a), diff(n->b));
        case Op::Sub: return mk(Op::Sub, diff(n->a), diff(n->b));
        case Op::Mul: return mk(Op::Add, mk(Op::Mul, diff(n->a), n->b), mk(Op::Mul, n->a, diff(n->b)));
        case Op::Div:
            return mk(Op::Div, mk(Op::Sub, mk(Op::Mul, diff(n->a), n->b), mk(Op::Mul, n->a, diff(n->b))),
                      mk(Op::Mul, n->b, n->b));
        case Op::Neg: return mk(Op::Neg, diff(n->a));
        case Op::Exp: return mk(Op::Mul, diff(n->a), n);
        case Op::Log: return mk(Op::Div, diff(n->a), n->a);
        case Op::Sqrt: return mk(Op::Div, diff(n->a), mk(Op::Mul, num(2), n));
        case Op::Pow:
            if (!has_var(n->b)) {
                // c * a^(c-1) * a'
                return mk(Op::Mul, mk(Op::Mul, n->b, mk(Op::Pow, n->a, mk(Op::Sub, n->b, num(1)))), diff(n->a));
            }
            // a^b (b' log a + b a'/a)
            return mk(Op::Mul, n,
                      mk(Op::Add, mk(Op::Mul, diff(n->b), mk(Op::Log, n->a)),
                         mk(Op::Div, mk(Op::Mul, n->b, diff(n->a)), n->a)));
    }
    return num(NAN);
}

void print(const NodeP& n, std::ostream& os) {
    switch (n->op) {
        case Op::Num: os << n->value; return;
        case Op::Var: os << "x"; return;
        case Op::Neg: os << "(-"; print(n->a, os); os << ")"; return;
        case Op::Exp: os << "exp("; print(n->a, os); os << ")"; return;
        case Op::Log: os << "log("; print(n->a, os); os << ")"; return;
        case Op::Sqrt: os << "sqrt("; print(n->a, os); os << ")"; return;
        default: break;
    }
    const char* sym = n->op == Op::Add ? "+" : n->op == Op::Sub ? "-" : n->op == Op::Mul ? "*" : n->op == Op::Div ? "/" : "^";
    os << "(";
    print(n->a, os);
    os << sym;
    print(n->b, os);
    os << ")";
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodeP parse() {
        NodeP n = expr();
        skip();
        if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
        return n;
    }

private:
    std::string_view s_;
    size_t pos_ = 0;

    [[noreturn]] void error(const std::string& msg) {
        throw ValidationError("expression '" + std::string(s_) + "': " + msg + " at offset " + std::to_string(pos_));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace((unsigned char)s_[pos_])) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) error(std::string("expected '") + c + "'");
    }

    NodeP expr() {
        NodeP n = term();
        for (;;) {
            if (accept('+'))
                n = mk(Op::Add, n, term());
            else if (accept('-'))
                n = mk(Op::Sub, n, term());
            else
                return n;
        }
    }
    NodeP term() {
        NodeP n = unary();
        for (;;) {
            if (accept('*'))
                n = mk(Op::Mul, n, unary());
            else if (accept('/'))
                n = mk(Op::Div, n, unary());
            else
                return n;
        }
    }
    NodeP unary() {
        if (accept('-')) return mk(Op::Neg, unary());
        if (accept('+')) return unary();
        return power();
    }
    NodeP power() {
        NodeP base = primary();
        if (accept('^')) return mk(Op::Pow, base, unary());
        return base;
    }
    NodeP primary() {
        skip();
        if (pos_ >= s_.size()) error("unexpected end");
        char c = s_[pos_];
        if (accept('(')) {
            NodeP n = expr();
            expect(')');
            return n;
        }
        if (std::isdigit((unsigned char)c) || c == '.') {
            size_t start = pos_;
            while (pos_ < s_.size() && (std::isdigit((unsigned char)s_[pos_]) || s_[pos_] == '.')) ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
                size_t save = pos_++;
                if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
                if (pos_ < s_.size() && std::isdigit((unsigned char)s_[pos_])) {
                    while (pos_ < s_.size() && std::isdigit((unsigned char)s_[pos_])) ++pos_;
                } else {
                    pos_ = save;
                }
            }
            std::string tok(s_.substr(start, pos_ - start));
            try {
                size_t used = 0;
                double v = std::stod(tok, &used);
                if (used != tok.size()) error("bad number '" + tok + "'");
                return num(v);
            } catch (const std::logic_error&) {
                error("bad number '" + tok + "'");
            }
        }
        if (std::isalpha((unsigned char)c)) {
            size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum((unsigned char)s_[pos_])) ++pos_;
            std::string id(s_.substr(start, pos_ - start));
            if (id == "x") return var();
            if (id == "pi") return num(std::numbers::pi);
            if (id == "pi2") return num(std::numbers::pi * std::numbers::pi);
            if (id == "e") return num(std::numbers::e);
            if (id == "exp" || id == "log" || id == "sqrt") {
                expect('(');
                NodeP a = expr();
                expect(')');
                return mk(id == "exp" ? Op::Exp : id == "log" ? Op::Log : Op::Sqrt, a);
            }
            if (id == "pow") {
                expect('(');
                NodeP a = expr();
                expect(',');
                NodeP b = expr();
                expect(')');
                return mk(Op::Pow, a, b);
            }
            pos_ = start;
            error("unknown identifier '" + id + "'");
        }
        error("unexpected '" + std::string(1, c) + "'");
    }
};

}  // namespace

Expr Expr::parse(std::string_view text) { return Expr(Parser(text).parse()); }
Expr Expr::constant(double v) { return Expr(num(v)); }
double Expr::operator()(double x) const { return eval(*node_, x); }
Expr Expr::derivative() const { return Expr(diff(node_)); }
bool Expr::depends_on_x() const { return has_var(node_); }

std::string Expr::str() const {
    std::ostringstream os;
    os.precision(17);
    print(node_, os);
    return os.str();
}

double parse_scalar(std::string_view text) {
    Expr e = Expr::parse(text);
    if (e.depends_on_x()) throw ValidationError("expected a constant, got '" + std::string(text) + "'");
    double v = e(0.0);
    if (!std::isfinite(v)) throw ValidationError("non-finite value '" + std::string(text) + "'");
    return v;
}

}  // namespace specdegen

#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace specdegen {

// Small infix expression language in one variable x:
//   numbers, x, pi, pi2 (= pi^2), e, + - * / ^, unary minus,
//   exp(a), log(a), sqrt(a), pow(a, b).
class Expr {
public:
    struct Node;

    static Expr parse(std::string_view text);
    static Expr constant(double v);

    double operator()(double x) const;
    Expr derivative() const;
    bool depends_on_x() const;
    std::string str() const;

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

// Parses a number or constant expression such as "pi2", "2*pi^2", "9.87".
double parse_scalar(std::string_view text);

}  // namespace specdegen

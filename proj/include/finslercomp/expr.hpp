// A small arithmetic grammar for scenario-defined Lagrangians, weights and
// scalar functions. Variables are x0..x{dim-1} and v0..v{dim-1}; named
// constants are resolved at parse time.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: sin cos tan exp log sqrt sinh cosh tanh atan asin acos atan2 pow.
#pragma once

#include <map>
#include <memory>
#include <string>

#include "finslercomp/space.hpp"

namespace finslercomp {

struct ParseError : Error {
    std::size_t position;
    ParseError(const std::string& msg, std::size_t pos)
        : Error("parse error at position " + std::to_string(pos) + ": " + msg), position(pos) {}
};

class Expr {
public:
    static Expr parse(const std::string& text, int dim, const std::map<std::string, double>& constants = {});

    template <class T>
    T eval(const T* x, const T* v) const;
    double operator()(const Vec& x, const Vec& v) const { return eval<double>(x.data(), v.data()); }

    TMField field() const;
    bool uses_v() const { return uses_v_; }
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
    bool uses_v_ = false;
};

extern template double Expr::eval<double>(const double*, const double*) const;
extern template D1 Expr::eval<D1>(const D1*, const D1*) const;
extern template D2 Expr::eval<D2>(const D2*, const D2*) const;
extern template D3 Expr::eval<D3>(const D3*, const D3*) const;
extern template D4 Expr::eval<D4>(const D4*, const D4*) const;

}  // namespace finslercomp

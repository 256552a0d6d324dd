#include "finslercomp/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace finslercomp {

enum class Op { num, x, v, neg, add, sub, mul, div, ipow, pow, call };
enum class Fn { sin, cos, tan, exp, log, sqrt, sinh, cosh, tanh, atan, asin, acos, atan2, pow };

struct Expr::Node {
    Op op = Op::num;
    double value = 0.0;
    int index = 0;  // variable index, integer exponent
    Fn fn = Fn::sin;
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodeP = std::shared_ptr<const Expr::Node>;

const std::map<std::string, std::pair<Fn, int>>& functions() {
    static const std::map<std::string, std::pair<Fn, int>> f = {
        {"sin", {Fn::sin, 1}},   {"cos", {Fn::cos, 1}},     {"tan", {Fn::tan, 1}},   {"exp", {Fn::exp, 1}},
        {"log", {Fn::log, 1}},   {"sqrt", {Fn::sqrt, 1}},   {"sinh", {Fn::sinh, 1}}, {"cosh", {Fn::cosh, 1}},
        {"tanh", {Fn::tanh, 1}}, {"atan", {Fn::atan, 1}},   {"asin", {Fn::asin, 1}}, {"acos", {Fn::acos, 1}},
        {"atan2", {Fn::atan2, 2}}, {"pow", {Fn::pow, 2}},
    };
    return f;
}

class Parser {
public:
    Parser(const std::string& s, int dim, const std::map<std::string, double>& c) : s_(s), dim_(dim), consts_(c) {}

    NodeP parse_all(bool& uses_v) {
        NodeP n = expr();
        skip();
        if (p_ != s_.size()) throw ParseError("unexpected '" + std::string(1, s_[p_]) + "'", p_);
        uses_v = uses_v_;
        return n;
    }

private:
    const std::string& s_;
    int dim_;
    const std::map<std::string, double>& consts_;
    std::size_t p_ = 0;
    bool uses_v_ = false;

    void skip() {
        while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
    }
    bool accept(char c) {
        skip();
        if (p_ < s_.size() && s_[p_] == c) {
            ++p_;
            return true;
        }
        return false;
    }
    static NodeP make(Op op, std::vector<NodeP> args = {}, double value = 0.0, int index = 0) {
        auto n = std::make_shared<Expr::Node>();
        n->op = op;
        n->args = std::move(args);
        n->value = value;
        n->index = index;
        return n;
    }

    NodeP expr() {
        NodeP l = term();
        for (;;) {
            if (accept('+')) l = make(Op::add, {l, term()});
            else if (accept('-')) l = make(Op::sub, {l, term()});
            else return l;
        }
    }
    NodeP term() {
        NodeP l = unary();
        for (;;) {
            if (accept('*')) l = make(Op::mul, {l, unary()});
            else if (accept('/')) l = make(Op::div, {l, unary()});
            else return l;
        }
    }
    NodeP unary() {
        if (accept('-')) return make(Op::neg, {unary()});
        if (accept('+')) return unary();
        return power();
    }
    NodeP power() {
        NodeP base = primary();
        if (!accept('^')) return base;
        NodeP ex = unary();
        if (ex->op == Op::num && ex->value == std::round(ex->value) && std::abs(ex->value) <= 16)
            return make(Op::ipow, {base}, 0.0, int(ex->value));
        return make(Op::pow, {base, ex});
    }
    NodeP primary() {
        skip();
        if (p_ >= s_.size()) throw ParseError("unexpected end of expression", p_);
        char c = s_[p_];
        if (accept('(')) {
            NodeP n = expr();
            if (!accept(')')) throw ParseError("expected ')'", p_);
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + p_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin) throw ParseError("bad number", p_);
            p_ += std::size_t(end - begin);
            return make(Op::num, {}, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = p_;
            while (p_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_')) ++p_;
            std::string name = s_.substr(start, p_ - start);
            skip();
            if (p_ < s_.size() && s_[p_] == '(') {
                auto it = functions().find(name);
                if (it == functions().end()) throw ParseError("unknown function '" + name + "'", start);
                ++p_;
                std::vector<NodeP> args{expr()};
                while (accept(',')) args.push_back(expr());
                if (!accept(')')) throw ParseError("expected ')' after arguments of " + name, p_);
                if (int(args.size()) != it->second.second)
                    throw ParseError(name + " takes " + std::to_string(it->second.second) + " argument(s)", start);
                auto n = std::make_shared<Expr::Node>();
                n->op = Op::call;
                n->fn = it->second.first;
                n->args = std::move(args);
                return n;
            }
            if ((name[0] == 'x' || name[0] == 'v') && name.size() > 1 &&
                name.find_first_not_of("0123456789", 1) == std::string::npos) {
                int idx = std::atoi(name.c_str() + 1);
                if (idx >= dim_)
                    throw ParseError("variable " + name + " exceeds dimension " + std::to_string(dim_), start);
                if (name[0] == 'v') uses_v_ = true;
                return make(name[0] == 'x' ? Op::x : Op::v, {}, 0.0, idx);
            }
            if (name == "pi") return make(Op::num, {}, M_PI);
            auto it = consts_.find(name);
            if (it != consts_.end()) return make(Op::num, {}, it->second);
            throw ParseError("unknown name '" + name + "'", start);
        }
        throw ParseError("unexpected '" + std::string(1, c) + "'", p_);
    }
};

template <class T>
T eval_node(const Expr::Node& n, const T* x, const T* v) {
    using std::acos, std::asin, std::atan, std::atan2, std::cos, std::cosh, std::exp, std::log, std::pow, std::sin,
        std::sinh, std::sqrt, std::tan, std::tanh;
    switch (n.op) {
        case Op::num: return T(n.value);
        case Op::x: return x[n.index];
        case Op::v: return v[n.index];
        case Op::neg: return -eval_node(*n.args[0], x, v);
        case Op::add: return eval_node(*n.args[0], x, v) + eval_node(*n.args[1], x, v);
        case Op::sub: return eval_node(*n.args[0], x, v) - eval_node(*n.args[1], x, v);
        case Op::mul: return eval_node(*n.args[0], x, v) * eval_node(*n.args[1], x, v);
        case Op::div: return eval_node(*n.args[0], x, v) / eval_node(*n.args[1], x, v);
        case Op::ipow: return ipow(eval_node(*n.args[0], x, v), n.index);
        case Op::pow: return pow(eval_node(*n.args[0], x, v), eval_node(*n.args[1], x, v));
        case Op::call: break;
    }
    T a = eval_node(*n.args[0], x, v);
    switch (n.fn) {
        case Fn::sin: return sin(a);
        case Fn::cos: return cos(a);
        case Fn::tan: return tan(a);
        case Fn::exp: return exp(a);
        case Fn::log: return log(a);
        case Fn::sqrt: return sqrt(a);
        case Fn::sinh: return sinh(a);
        case Fn::cosh: return cosh(a);
        case Fn::tanh: return tanh(a);
        case Fn::atan: return atan(a);
        case Fn::asin: return asin(a);
        case Fn::acos: return acos(a);
        case Fn::atan2: return atan2(a, eval_node(*n.args[1], x, v));
        case Fn::pow: return pow(a, eval_node(*n.args[1], x, v));
    }
    return a;
}

}  // namespace

Expr Expr::parse(const std::string& text, int dim, const std::map<std::string, double>& constants) {
    if (dim < 1) throw Error("Expr::parse: dimension must be positive");
    Expr e;
    Parser p(text, dim, constants);
    e.root_ = p.parse_all(e.uses_v_);
    e.text_ = text;
    return e;
}

template <class T>
T Expr::eval(const T* x, const T* v) const {
    return eval_node(*root_, x, v);
}

template double Expr::eval<double>(const double*, const double*) const;
template D1 Expr::eval<D1>(const D1*, const D1*) const;
template D2 Expr::eval<D2>(const D2*, const D2*) const;
template D3 Expr::eval<D3>(const D3*, const D3*) const;
template D4 Expr::eval<D4>(const D4*, const D4*) const;

TMField Expr::field() const {
    Expr self = *this;
    return TMField::from([self](const auto* x, const auto* v) { return self.eval(x, v); });
}

}  // namespace finslercomp

// Forward-mode dual numbers. Nesting Dual<Dual<...>> gives exact mixed
// derivatives of any order, one seed direction per nesting level.
#pragma once

#include <cmath>
#include <type_traits>

namespace finslercomp {

template <class T>
struct Dual {
    T a{};  // value
    T b{};  // derivative along the seed

    Dual() = default;
    Dual(double x) : a(x), b(0.0) {}
    template <class U, class = std::enable_if_t<!std::is_arithmetic_v<U> && std::is_convertible_v<U, T>>>
    Dual(const U& x) : a(x), b(0.0) {}
    Dual(const T& x, const T& dx) : a(x), b(dx) {}

    Dual& operator+=(const Dual& o) { a += o.a; b += o.b; return *this; }
    Dual& operator-=(const Dual& o) { a -= o.a; b -= o.b; return *this; }
    Dual& operator*=(const Dual& o) { b = b * o.a + a * o.b; a *= o.a; return *this; }
    Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }
    Dual operator-() const { return Dual(-a, -b); }
    Dual operator+() const { return *this; }

    friend Dual operator+(const Dual& x, const Dual& y) { return Dual(x.a + y.a, x.b + y.b); }
    friend Dual operator-(const Dual& x, const Dual& y) { return Dual(x.a - y.a, x.b - y.b); }
    friend Dual operator*(const Dual& x, const Dual& y) { return Dual(x.a * y.a, x.b * y.a + x.a * y.b); }
    friend Dual operator/(const Dual& x, const Dual& y) {
        T q = x.a / y.a;
        return Dual(q, (x.b - q * y.b) / y.a);
    }
    friend Dual operator+(const Dual& x, double y) { return Dual(x.a + y, x.b); }
    friend Dual operator+(double y, const Dual& x) { return Dual(x.a + y, x.b); }
    friend Dual operator-(const Dual& x, double y) { return Dual(x.a - y, x.b); }
    friend Dual operator-(double y, const Dual& x) { return Dual(y - x.a, -x.b); }
    friend Dual operator*(const Dual& x, double y) { return Dual(x.a * y, x.b * y); }
    friend Dual operator*(double y, const Dual& x) { return Dual(x.a * y, x.b * y); }
    friend Dual operator/(const Dual& x, double y) { return Dual(x.a / y, x.b / y); }
    friend Dual operator/(double y, const Dual& x) { return Dual(y) / x; }

    friend bool operator<(const Dual& x, const Dual& y) { return x.a < y.a; }
    friend bool operator>(const Dual& x, const Dual& y) { return x.a > y.a; }
    friend bool operator<=(const Dual& x, const Dual& y) { return x.a <= y.a; }
    friend bool operator>=(const Dual& x, const Dual& y) { return x.a >= y.a; }
    friend bool operator<(const Dual& x, double y) { return x.a < y; }
    friend bool operator>(const Dual& x, double y) { return x.a > y; }
    friend bool operator<=(const Dual& x, double y) { return x.a <= y; }
    friend bool operator>=(const Dual& x, double y) { return x.a >= y; }
};

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;
using D4 = Dual<D3>;

inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) { return primal(x.a); }

// Elementary functions; chain rule applied one level at a time.
template <class T> Dual<T> sqrt(const Dual<T>& x) { using std::sqrt; T s = sqrt(x.a); return Dual<T>(s, x.b / (2.0 * s)); }
template <class T> Dual<T> exp(const Dual<T>& x) { using std::exp; T e = exp(x.a); return Dual<T>(e, e * x.b); }
template <class T> Dual<T> log(const Dual<T>& x) { using std::log; return Dual<T>(log(x.a), x.b / x.a); }
template <class T> Dual<T> sin(const Dual<T>& x) { using std::sin; using std::cos; return Dual<T>(sin(x.a), cos(x.a) * x.b); }
template <class T> Dual<T> cos(const Dual<T>& x) { using std::sin; using std::cos; return Dual<T>(cos(x.a), -sin(x.a) * x.b); }
template <class T> Dual<T> tan(const Dual<T>& x) { using std::tan; T t = tan(x.a); return Dual<T>(t, (1.0 + t * t) * x.b); }
template <class T> Dual<T> sinh(const Dual<T>& x) { using std::sinh; using std::cosh; return Dual<T>(sinh(x.a), cosh(x.a) * x.b); }
template <class T> Dual<T> cosh(const Dual<T>& x) { using std::sinh; using std::cosh; return Dual<T>(cosh(x.a), sinh(x.a) * x.b); }
template <class T> Dual<T> tanh(const Dual<T>& x) { using std::tanh; T t = tanh(x.a); return Dual<T>(t, (1.0 - t * t) * x.b); }
template <class T> Dual<T> atan(const Dual<T>& x) { using std::atan; return Dual<T>(atan(x.a), x.b / (1.0 + x.a * x.a)); }
template <class T> Dual<T> asin(const Dual<T>& x) { using std::asin; using std::sqrt; return Dual<T>(asin(x.a), x.b / sqrt(1.0 - x.a * x.a)); }
template <class T> Dual<T> acos(const Dual<T>& x) { using std::acos; using std::sqrt; return Dual<T>(acos(x.a), -x.b / sqrt(1.0 - x.a * x.a)); }
template <class T> Dual<T> abs(const Dual<T>& x) { return primal(x) < 0 ? -x : x; }
template <class T> Dual<T> atan2(const Dual<T>& y, const Dual<T>& x) {
    using std::atan2;
    T r2 = x.a * x.a + y.a * y.a;
    return Dual<T>(atan2(y.a, x.a), (x.a * y.b - y.a * x.b) / r2);
}
template <class T> Dual<T> pow(const Dual<T>& x, double p) {
    using std::pow;
    if (p == 0.0) return Dual<T>(1.0);
    T xp1 = pow(x.a, p - 1.0);
    return Dual<T>(xp1 * x.a, p * xp1 * x.b);
}
template <class T> Dual<T> pow(const Dual<T>& x, const Dual<T>& p) { return exp(p * log(x)); }

// Integer power by repeated multiplication (exact for negative bases).
template <class T>
T ipow(const T& x, int k) {
    if (k < 0) return T(1.0) / ipow(x, -k);
    T r(1.0);
    for (int i = 0; i < k; ++i) r = r * x;
    return r;
}

}  // namespace finslercomp

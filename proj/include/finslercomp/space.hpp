// Charted (Lorentz-)Finsler spaces: a 2-homogeneous Lagrangian on one chart,
// optionally with a 0-homogeneous weight.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "finslercomp/dual.hpp"

namespace finslercomp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Signature { positive, lorentzian };

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : Error {  // point outside chart or vector inadmissible
    using Error::Error;
};
struct NumericalError : Error {
    using Error::Error;
};
struct HypothesisError : Error {
    using Error::Error;
};

// A scalar field on TM evaluable on double and nested duals up to order 4.
class TMField {
public:
    template <class T>
    using Fn = std::function<T(const T* x, const T* v)>;

    TMField() = default;

    // f must be a generic callable (const T* x, const T* v) -> T.
    template <class F>
    static TMField from(F f) {
        TMField r;
        r.f0_ = [f](const double* x, const double* v) { return f(x, v); };
        r.f1_ = [f](const D1* x, const D1* v) { return f(x, v); };
        r.f2_ = [f](const D2* x, const D2* v) { return f(x, v); };
        r.f3_ = [f](const D3* x, const D3* v) { return f(x, v); };
        r.f4_ = [f](const D4* x, const D4* v) { return f(x, v); };
        return r;
    }

    explicit operator bool() const { return static_cast<bool>(f0_); }

    template <class T>
    T operator()(const T* x, const T* v) const {
        if constexpr (std::is_same_v<T, double>) return f0_(x, v);
        else if constexpr (std::is_same_v<T, D1>) return f1_(x, v);
        else if constexpr (std::is_same_v<T, D2>) return f2_(x, v);
        else if constexpr (std::is_same_v<T, D3>) return f3_(x, v);
        else {
            static_assert(std::is_same_v<T, D4>, "TMField supports nesting depth <= 4");
            return f4_(x, v);
        }
    }

    double operator()(const Vec& x, const Vec& v) const { return f0_(x.data(), v.data()); }

private:
    Fn<double> f0_;
    Fn<D1> f1_;
    Fn<D2> f2_;
    Fn<D3> f3_;
    Fn<D4> f4_;
};

// Orientation used for the future cone: a fixed vector field X(x).
using VectorField = std::function<Vec(const Vec& x)>;

struct ChartedSpace {
    std::string name;
    int dim = 0;
    Signature signature = Signature::positive;
    TMField lagrangian;                            // L = F^2/2 (positive) or the Lorentz-Finsler L
    std::function<bool(const Vec&)> chart_domain;  // empty means all of R^dim
    std::optional<TMField> weight;                 // psi, 0-homogeneous in v
    VectorField time_orientation;                  // lorentzian only
    double cone_margin = 1e-6;

    bool in_domain(const Vec& x) const { return !chart_domain || chart_domain(x); }
    double L(const Vec& x, const Vec& v) const { return lagrangian(x, v); }
    double psi(const Vec& x, const Vec& v) const { return weight ? (*weight)(x, v) : 0.0; }
    bool weighted() const { return weight.has_value(); }
    // transverse dimension m = dim - 1
    int m() const { return dim - 1; }
};

// Admissibility of v at x: nonzero (positive) or timelike with margin and
// future-directed (lorentzian). Throws DomainError with a reason.
void require_admissible(const ChartedSpace& s, const Vec& x, const Vec& v);
bool is_admissible(const ChartedSpace& s, const Vec& x, const Vec& v);
// v lies in the timelike cone component containing the time orientation
// (lightlike boundary vectors count when the open segment is timelike).
bool future_directed(const ChartedSpace& s, const Vec& x, const Vec& v);

// Unit direction a fraction `frac` of the way from `from` to `to` along the
// great circle (constant angular speed). The two must not be antipodal.
Vec angular_sweep(const Vec& from, const Vec& to, double frac);

}  // namespace finslercomp

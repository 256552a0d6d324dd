// Differentiation engine and the fundamental / Cartan tensors.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "finslercomp/report.hpp"
#include "finslercomp/space.hpp"

namespace finslercomp {

// One derivative direction: a coordinate slot in x or in v.
struct Partial {
    enum Slot { x, v } slot;
    int index;
};

enum class DiffMethod {
    automatic,   // duals for pure vertical orders <= 2, Richardson otherwise
    dual,        // nested duals for everything (exact up to roundoff)
    richardson,  // central differences with one Richardson step
};

struct Derivative {
    double value = 0.0;
    double error_estimate = 0.0;
};

// Mixed partial of `field` at (x, v), total order <= 4.
// Throws DomainError / Error("order too high") / NumericalError when the
// estimate exceeds `tol` (tol <= 0 disables the check).
Derivative derive(const ChartedSpace& s, const TMField& field, const Vec& x, const Vec& v,
                  const std::vector<Partial>& partials, DiffMethod method = DiffMethod::automatic,
                  double tol = 0.0);

struct MetricAtVector {
    Mat matrix;
    Vec x, v;
};

// Rank-3 symmetric array, C(i,j,k) = data[(i*n+j)*n+k].
struct Tensor3 {
    int n = 0;
    std::vector<double> data;
    explicit Tensor3(int n_ = 0) : n(n_), data(std::size_t(n_) * n_ * n_, 0.0) {}
    double& operator()(int i, int j, int k) { return data[(std::size_t(i) * n + j) * n + k]; }
    double operator()(int i, int j, int k) const { return data[(std::size_t(i) * n + j) * n + k]; }
    double max_abs() const;
};

// g_ij(v); validates symmetry, signature and conditioning.
MetricAtVector fundamental_tensor(const ChartedSpace& s, const Vec& x, const Vec& v);
// Same without the signature / conditioning validation (used by checks).
Mat vertical_hessian(const ChartedSpace& s, const Vec& x, const Vec& v);
Tensor3 cartan_tensor(const ChartedSpace& s, const Vec& x, const Vec& v);

struct TangentVector {
    Vec base;
    Vec coords;
};
double inner_product(const MetricAtVector& g, const Vec& w1, const Vec& w2);
double inner_product(const MetricAtVector& g, const TangentVector& w1, const TangentVector& w2);

double finsler_norm(const ChartedSpace& s, const Vec& x, const Vec& v);

// Number of negative eigenvalues of a symmetric matrix.
int negative_eigenvalues(const Mat& g);

struct HomogeneityOptions {
    double x_box = 0.8;     // sample x in [-x_box, x_box]^dim (clipped to chart)
    double tolerance = 1e-8;
};
// Samples admissible (x, v, c) and reports L(cv)-c^2L(v), g(cv)-g(v),
// C(v)v and g_v(v,v)-2L(v); failures are reported, never thrown.
CheckReport validate_homogeneity(const ChartedSpace& s, int sample_count, std::uint64_t rng_seed,
                                 const HomogeneityOptions& opt = {});

// Random admissible (x, v) pair; used by validation and property checks.
struct Sample {
    Vec x, v;
};
std::vector<Sample> sample_admissible(const ChartedSpace& s, int count, std::uint64_t seed, double x_box = 0.8);

}  // namespace finslercomp

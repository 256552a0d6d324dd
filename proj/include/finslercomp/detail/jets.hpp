// Templated building blocks shared by the tensor, connection and curvature
// code: vertical Hessian, spray, and small dense solves over dual scalars.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "finslercomp/space.hpp"

namespace finslercomp::detail {

template <class T>
using Arr = std::vector<T>;

template <class T>
Dual<T> lift(const T& x, const T& dx) { return Dual<T>(x, dx); }

// Second-order lift: value x, inner seed d1, outer seed d2.
template <class T>
Dual<Dual<T>> lift2(const T& x, const T& d1, const T& d2) {
    return Dual<Dual<T>>(Dual<T>(x, d1), Dual<T>(d2, T(0.0)));
}

// Gaussian elimination with partial pivoting on the primal part. A is
// row-major n x n and is destroyed; rhs holds k columns (row-major n x k).
template <class T>
void solve_inplace(Arr<T>& A, Arr<T>& rhs, int n, int k) {
    for (int c = 0; c < n; ++c) {
        int p = c;
        double best = std::abs(primal(A[c * n + c]));
        for (int r = c + 1; r < n; ++r) {
            double v = std::abs(primal(A[r * n + c]));
            if (v > best) { best = v; p = r; }
        }
        if (!(best > 0.0) || !std::isfinite(best)) throw NumericalError("singular fundamental tensor");
        if (p != c) {
            for (int j = 0; j < n; ++j) std::swap(A[c * n + j], A[p * n + j]);
            for (int j = 0; j < k; ++j) std::swap(rhs[c * k + j], rhs[p * k + j]);
        }
        for (int r = c + 1; r < n; ++r) {
            T f = A[r * n + c] / A[c * n + c];
            if (primal(f) == 0.0) continue;
            for (int j = c; j < n; ++j) A[r * n + j] -= f * A[c * n + j];
            for (int j = 0; j < k; ++j) rhs[r * k + j] -= f * rhs[c * k + j];
        }
    }
    for (int c = n - 1; c >= 0; --c) {
        for (int j = 0; j < k; ++j) {
            T s = rhs[c * k + j];
            for (int q = c + 1; q < n; ++q) s -= A[c * n + q] * rhs[q * k + j];
            rhs[c * k + j] = s / A[c * n + c];
        }
    }
}

// g_ij = d^2 L / dv^i dv^j, row-major.
template <class T>
Arr<T> vertical_hessian(const TMField& L, int n, const T* x, const T* v) {
    using DD = Dual<Dual<T>>;
    Arr<DD> X(n), V(n);
    for (int i = 0; i < n; ++i) X[i] = lift2<T>(x[i], T(0.0), T(0.0));
    Arr<T> g(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            for (int q = 0; q < n; ++q)
                V[q] = lift2<T>(v[q], T(q == i ? 1.0 : 0.0), T(q == j ? 1.0 : 0.0));
            DD r = L(X.data(), V.data());
            g[i * n + j] = r.b.b;
            g[j * n + i] = r.b.b;
        }
    }
    return g;
}

// Spray coefficients G^i = 1/2 g^{il} (d^2L/dv^l dx^k v^k - dL/dx^l).
template <class T>
Arr<T> spray(const TMField& L, int n, const T* x, const T* v) {
    using DD = Dual<Dual<T>>;
    Arr<T> g = vertical_hessian<T>(L, n, x, v);
    Arr<T> rhs(n);
    Arr<DD> X(n), V(n);
    for (int l = 0; l < n; ++l) {
        // inner seed: x moves along v; outer seed: v moves along e_l
        for (int q = 0; q < n; ++q) {
            X[q] = lift2<T>(x[q], v[q], T(0.0));
            V[q] = lift2<T>(v[q], T(0.0), T(q == l ? 1.0 : 0.0));
        }
        DD r = L(X.data(), V.data());
        rhs[l] = r.b.b;
    }
    Arr<Dual<T>> X1(n), V1(n);
    for (int l = 0; l < n; ++l) {
        for (int q = 0; q < n; ++q) {
            X1[q] = lift<T>(x[q], T(q == l ? 1.0 : 0.0));
            V1[q] = lift<T>(v[q], T(0.0));
        }
        rhs[l] -= L(X1.data(), V1.data()).b;
    }
    solve_inplace<T>(g, rhs, n, 1);
    for (auto& r : rhs) r = 0.5 * r;
    return rhs;
}

// Vertical derivative of the spray along a fixed direction d (double):
// returns d^2 G / ... via one extra dual level. Used for N and curvature.
template <class T>
Arr<Dual<T>> spray_dir(const TMField& L, int n, const T* x, const T* v, const double* dx, const double* dv) {
    Arr<Dual<T>> X(n), V(n);
    for (int q = 0; q < n; ++q) {
        X[q] = lift<T>(x[q], T(dx ? dx[q] : 0.0));
        V[q] = lift<T>(v[q], T(dv ? dv[q] : 0.0));
    }
    return spray<Dual<T>>(L, n, X.data(), V.data());
}

}  // namespace finslercomp::detail

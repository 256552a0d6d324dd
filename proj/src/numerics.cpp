#include "finslercomp/numerics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

namespace finslercomp {

std::vector<std::vector<double>> fd_weights(double z, const std::vector<double>& x, int m) {
    int n = int(x.size()) - 1;
    std::vector<std::vector<double>> c(m + 1, std::vector<double>(n + 1, 0.0));
    double c1 = 1.0, c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0, c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

GridDerivatives uniform_derivatives(const std::vector<double>& f, double dt) {
    int N = int(f.size());
    GridDerivatives out{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0)};
    if (N < 2) return out;
    int w = std::min(7, N);
    // cache weights by offset of the evaluation point inside the stencil
    std::vector<std::vector<std::vector<double>>> cache(w);
    std::vector<double> nodes(w);
    for (int j = 0; j < w; ++j) nodes[j] = j;
    for (int p = 0; p < w; ++p) cache[p] = fd_weights(double(p), nodes, std::min(2, w - 1));
    for (int i = 0; i < N; ++i) {
        int start = std::clamp(i - w / 2, 0, N - w);
        int p = i - start;
        double a = 0.0, b = 0.0;
        for (int j = 0; j < w; ++j) {
            a += cache[p][1][j] * f[start + j];
            if (w > 2) b += cache[p][2][j] * f[start + j];
        }
        out.d1[i] = a / dt;
        out.d2[i] = b / (dt * dt);
    }
    return out;
}

double quintic_hermite(double t0, double t1, double f0, double f1, double d0, double d1, double s0, double s1,
                       double t) {
    double h = t1 - t0;
    if (h == 0.0) return f0;
    double u = (t - t0) / h;
    double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
    double H0 = 1 - 10 * u3 + 15 * u4 - 6 * u5;
    double H1 = u - 6 * u3 + 8 * u4 - 3 * u5;
    double H2 = 0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5;
    double H3 = 0.5 * u3 - u4 + 0.5 * u5;
    double H4 = -4 * u3 + 7 * u4 - 3 * u5;
    double H5 = 10 * u3 - 15 * u4 + 6 * u5;
    return H0 * f0 + H1 * h * d0 + H2 * h * h * s0 + H3 * h * h * s1 + H4 * h * d1 + H5 * f1;
}

double integrate(const std::function<double(double)>& f, double a, double b, double rtol, double* error) {
    if (a == b) {
        if (error) *error = 0.0;
        return 0.0;
    }
    double err = 0.0;
    double r = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 15, rtol, &err);
    if (error) *error = err;
    return r;
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int count, double a, double b) {
    if (count < 1) throw std::invalid_argument("gauss_legendre: count must be positive");
    // Golub-Welsch: eigen-decomposition of the Jacobi matrix
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(count, count);
    for (int i = 1; i < count; ++i) {
        double beta = i / std::sqrt(4.0 * i * i - 1.0);
        J(i, i - 1) = beta;
        J(i - 1, i) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    std::vector<double> x(count), w(count);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < count; ++i) {
        double v0 = es.eigenvectors()(0, i);
        x[i] = mid + half * es.eigenvalues()(i);
        w[i] = half * 2.0 * v0 * v0;
    }
    return {x, w};
}

double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    int i = index;
    while (i > 0) {
        f /= base;
        r += f * (i % base);
        i /= base;
    }
    return r;
}

}  // namespace finslercomp

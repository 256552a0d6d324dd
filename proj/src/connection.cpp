#include "finslercomp/connection.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "finslercomp/detail/jets.hpp"

namespace finslercomp {

Vec spray_at(const ChartedSpace& s, const Vec& x, const Vec& v) {
    auto G = detail::spray<double>(s.lagrangian, s.dim, x.data(), v.data());
    return Eigen::Map<Vec>(G.data(), s.dim);
}

Mat nonlinear_at(const ChartedSpace& s, const Vec& x, const Vec& v) {
    int n = s.dim;
    Mat N(n, n);
    std::vector<double> e(n, 0.0);
    for (int j = 0; j < n; ++j) {
        e.assign(n, 0.0);
        e[j] = 1.0;
        auto d = detail::spray_dir<double>(s.lagrangian, n, x.data(), v.data(), nullptr, e.data());
        for (int i = 0; i < n; ++i) N(i, j) = d[i].b;
    }
    return N;
}

ConnectionData connection_at(const ChartedSpace& s, const Vec& x, const Vec& v) {
    int n = s.dim;
    MetricAtVector gm = fundamental_tensor(s, x, v);
    Mat ginv = gm.matrix.inverse();
    // dg(l)(i,j) = d g_ij / dx^l
    std::vector<Mat> dg(n, Mat::Zero(n, n));
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                double d = derive(s, s.lagrangian, x, v, {{Partial::v, i}, {Partial::v, j}, {Partial::x, l}},
                                  DiffMethod::dual)
                               .value;
                dg[l](i, j) = d;
                dg[l](j, i) = d;
            }
    ConnectionData cd;
    cd.x = x;
    cd.v = v;
    cd.gamma = Tensor3(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double acc = 0.0;
                for (int l = 0; l < n; ++l) acc += ginv(i, l) * (dg[j](l, k) + dg[k](j, l) - dg[l](j, k));
                cd.gamma(i, j, k) = 0.5 * acc;
            }
    cd.spray = spray_at(s, x, v);
    cd.nonlinear = nonlinear_at(s, x, v);
    Tensor3 C = cartan_tensor(s, x, v);
    const Mat& N = cd.nonlinear;
    cd.chern = Tensor3(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double corr = 0.0;
                for (int l = 0; l < n; ++l) {
                    double inner = 0.0;
                    for (int m = 0; m < n; ++m)
                        inner += C(l, k, m) * N(m, j) + C(j, l, m) * N(m, k) - C(j, k, m) * N(m, l);
                    corr += ginv(i, l) * inner;
                }
                cd.chern(i, j, k) = cd.gamma(i, j, k) - corr;
            }
    return cd;
}

namespace {
Vec chern_apply(const Tensor3& chern, const Vec& a, const Vec& b) {
    int n = chern.n;
    Vec r = Vec::Zero(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) r[i] += chern(i, j, k) * a[j] * b[k];
    return r;
}
}  // namespace

Vec covariant_derivative(const ChartedSpace& s, const VectorField& X, const Vec& x, const Vec& v, const Vec& ref) {
    if (ref.size() != s.dim || ref.squaredNorm() == 0.0) throw DomainError("covariant_derivative: reference vector is zero");
    ConnectionData cd = connection_at(s, x, ref);
    double vn = v.norm();
    Vec dX = Vec::Zero(s.dim);
    if (vn > 0.0) {
        double h = 64.0 * std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, x.norm()) / vn;
        auto cd_step = [&](double hh) {
            Vec xp = x + hh * v, xm = x - hh * v;
            if (!s.in_domain(xp) || !s.in_domain(xm)) throw DomainError("covariant_derivative: stencil leaves chart");
            return Vec((X(xp) - X(xm)) / (2.0 * hh));
        };
        // one Richardson step on the central difference
        dX = (4.0 * cd_step(0.5 * h) - cd_step(h)) / 3.0;
    }
    return dX + chern_apply(cd.chern, v, X(x));
}

Vec covariant_derivative_along(const ChartedSpace& s, const Vec& x, const Vec& velocity, const Vec& X,
                               const Vec& dXdt, const Vec& ref) {
    if (ref.size() != s.dim || ref.squaredNorm() == 0.0) throw DomainError("covariant_derivative: reference vector is zero");
    ConnectionData cd = connection_at(s, x, ref);
    return dXdt + chern_apply(cd.chern, velocity, X);
}

Vec GeodesicPath::position(double tq) const {
    if (t.empty()) throw Error("empty geodesic");
    if (t.size() == 1) return x[0];
    auto it = std::upper_bound(t.begin(), t.end(), tq);
    std::size_t i = it == t.begin() ? 0 : std::min<std::size_t>(it - t.begin() - 1, t.size() - 2);
    return hermite_value(t[i], t[i + 1], x[i], x[i + 1], v[i], v[i + 1], tq);
}

Vec GeodesicPath::velocity(double tq) const {
    if (t.empty()) throw Error("empty geodesic");
    if (t.size() == 1) return v[0];
    auto it = std::upper_bound(t.begin(), t.end(), tq);
    std::size_t i = it == t.begin() ? 0 : std::min<std::size_t>(it - t.begin() - 1, t.size() - 2);
    return hermite_value(t[i], t[i + 1], v[i], v[i + 1], a[i], a[i + 1], tq);
}

GeodesicPath integrate_geodesic(const ChartedSpace& s, const Vec& x0, const Vec& v0, double t_end, double tol,
                                const GeodesicOptions& gopt) {
    if (!(t_end > 0.0)) throw Error("integrate_geodesic: t_end must be positive");
    if (!s.in_domain(x0)) throw DomainError("integrate_geodesic: initial point outside chart domain");
    require_admissible(s, x0, v0);
    int n = s.dim;
    OdeRhs rhs = [&](double, const Vec& y) {
        Vec x = y.head(n), v = y.tail(n);
        if (!s.in_domain(x)) throw DomainError("chart exit");
        Vec f(2 * n);
        f.head(n) = v;
        f.tail(n) = -2.0 * spray_at(s, x, v);
        return f;
    };
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol * 1e-3;
    opt.stops = gopt.grid;
    opt.record_only_stops = gopt.record_only_grid;
    if (gopt.hmax > 0.0) opt.hmax = gopt.hmax;
    opt.y_max = 1e8;
    Vec y0(2 * n);
    y0 << x0, v0;
    OdeSolution sol = integrate_dp54(rhs, 0.0, y0, t_end, opt);
    GeodesicPath p;
    p.t_end = t_end;
    p.t_reached = sol.t_reached;
    p.completed = sol.completed;
    p.stop_reason = sol.stop_reason;
    double L0 = s.L(x0, v0);
    for (std::size_t k = 0; k < sol.t.size(); ++k) {
        p.t.push_back(sol.t[k]);
        p.x.push_back(sol.y[k].head(n));
        p.v.push_back(sol.y[k].tail(n));
        p.a.push_back(sol.f[k].tail(n));
        p.lagrangian_drift = std::max(p.lagrangian_drift, std::abs(s.L(p.x.back(), p.v.back()) - L0));
    }
    return p;
}

Vec exponential_map(const ChartedSpace& s, const Vec& x, const Vec& v, double tol) {
    if (v.squaredNorm() == 0.0) return x;
    GeodesicPath p = integrate_geodesic(s, x, v, 1.0, tol);
    if (!p.completed)
        throw DomainError("exponential_map: geodesic stopped at t=" + std::to_string(p.t_reached) + " (" +
                          p.stop_reason + ")");
    return p.x.back();
}

Vec unit_speed(const ChartedSpace& s, const Vec& x, const Vec& v) { return v / finsler_norm(s, x, v); }

std::string geodesic_csv(const ChartedSpace& s, const GeodesicPath& p) {
    std::ostringstream os;
    int n = s.dim;
    os << "t";
    for (int i = 0; i < n; ++i) os << ",x" << i;
    for (int i = 0; i < n; ++i) os << ",v" << i;
    os << ",L\n";
    char buf[64];
    auto put = [&](double d) {
        std::snprintf(buf, sizeof buf, "%.17g", d);
        os << buf;
    };
    for (std::size_t k = 0; k < p.t.size(); ++k) {
        put(p.t[k]);
        for (int i = 0; i < n; ++i) { os << ','; put(p.x[k][i]); }
        for (int i = 0; i < n; ++i) { os << ','; put(p.v[k][i]); }
        os << ',';
        put(s.L(p.x[k], p.v[k]));
        os << '\n';
    }
    return os.str();
}

}  // namespace finslercomp

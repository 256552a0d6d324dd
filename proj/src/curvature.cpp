#include "finslercomp/curvature.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "finslercomp/detail/jets.hpp"
#include "finslercomp/numerics.hpp"

namespace finslercomp {

using detail::lift;
using detail::lift2;

CurvaturePack curvature_pack(const ChartedSpace& s, const Vec& x, const Vec& v) {
    const int n = s.dim;
    const TMField& L = s.lagrangian;
    auto G0 = detail::spray<double>(L, n, x.data(), v.data());
    std::vector<D2> X(n), V(n);
    std::vector<D1> X1(n), V1(n);
    CurvaturePack p;
    p.G = Eigen::Map<Vec>(G0.data(), n);
    p.N.resize(n, n);
    Mat part(n, n);
    for (int j = 0; j < n; ++j) {
        // x moves along v (inner), v moves along e_j (outer):
        // gives N^i_j and v^k dN^i_j/dx^k
        for (int q = 0; q < n; ++q) {
            X[q] = lift2<double>(x[q], v[q], 0.0);
            V[q] = lift2<double>(v[q], 0.0, q == j ? 1.0 : 0.0);
        }
        auto a = detail::spray<D2>(L, n, X.data(), V.data());
        // v moves along G (inner) and e_j (outer): G^k dN^i_j/dv^k
        for (int q = 0; q < n; ++q) {
            X[q] = lift2<double>(x[q], 0.0, 0.0);
            V[q] = lift2<double>(v[q], G0[q], q == j ? 1.0 : 0.0);
        }
        auto b = detail::spray<D2>(L, n, X.data(), V.data());
        for (int q = 0; q < n; ++q) {
            X1[q] = lift<double>(x[q], q == j ? 1.0 : 0.0);
            V1[q] = lift<double>(v[q], 0.0);
        }
        auto c = detail::spray<D1>(L, n, X1.data(), V1.data());
        for (int i = 0; i < n; ++i) {
            p.N(i, j) = a[i].b.a;
            part(i, j) = 2.0 * c[i].b - a[i].b.b + 2.0 * b[i].b.b;
        }
    }
    p.R = part - p.N * p.N;
    auto g = detail::vertical_hessian<double>(L, n, x.data(), v.data());
    p.g = Eigen::Map<Mat>(g.data(), n, n);  // symmetric, so storage order does not matter
    return p;
}

Mat curvature_operator(const ChartedSpace& s, const Vec& x, const Vec& v) {
    if (!s.in_domain(x)) throw DomainError("curvature_operator: point outside chart domain");
    require_admissible(s, x, v);
    return curvature_pack(s, x, v).R;
}

double ricci_scalar(const ChartedSpace& s, const Vec& x, const Vec& v) { return curvature_operator(s, x, v).trace(); }

double flag_curvature(const ChartedSpace& s, const Vec& x, const Vec& v, const Vec& w, double threshold) {
    if (!s.in_domain(x)) throw DomainError("flag_curvature: point outside chart domain");
    require_admissible(s, x, v);
    CurvaturePack p = curvature_pack(s, x, v);
    double gvv = v.dot(p.g * v), gww = w.dot(p.g * w), gvw = v.dot(p.g * w);
    double den = gvv * gww - gvw * gvw;
    double scale = std::abs(gvv) * std::abs(gww);
    if (!(std::abs(den) >= threshold * std::max(scale, 1e-300)) || scale == 0.0)
        throw DomainError("flag_curvature: degenerate flag");
    double num = (p.R * w).dot(p.g * w);
    return s.signature == Signature::positive ? num / den : -num / den;
}

Mat orthonormal_complement(const Mat& g, const Vec& v) {
    int n = int(v.size());
    double gvv = v.dot(g * v);
    std::vector<Vec> basis;
    for (int c = 0; c < n && int(basis.size()) < n - 1; ++c) {
        Vec w = Vec::Unit(n, c);
        w -= (v.dot(g * w) / gvv) * v;
        for (const auto& e : basis) w -= e.dot(g * w) * e;
        // second pass for numerical orthogonality
        w -= (v.dot(g * w) / gvv) * v;
        for (const auto& e : basis) w -= e.dot(g * w) * e;
        double nn = w.dot(g * w);
        if (!(nn > 1e-8)) continue;
        basis.push_back(w / std::sqrt(nn));
    }
    if (int(basis.size()) != n - 1) throw NumericalError("orthonormal_complement: could not build a frame");
    Mat E(n, n - 1);
    for (int a = 0; a < n - 1; ++a) E.col(a) = basis[a];
    return E;
}

Mat TransverseData::Y_at(double tq) const {
    const auto& t = path.t;
    if (t.size() < 2) return Y.front();
    auto it = std::upper_bound(t.begin(), t.end(), tq);
    std::size_t i = it == t.begin() ? 0 : std::min<std::size_t>(it - t.begin() - 1, t.size() - 2);
    Vec y0 = Eigen::Map<const Vec>(Y[i].data(), m * m), y1 = Eigen::Map<const Vec>(Y[i + 1].data(), m * m);
    Vec f0 = Eigen::Map<const Vec>(Yp[i].data(), m * m), f1 = Eigen::Map<const Vec>(Yp[i + 1].data(), m * m);
    Vec r = hermite_value(t[i], t[i + 1], y0, y1, f0, f1, tq);
    return Eigen::Map<Mat>(r.data(), m, m);
}

TransverseData transverse_data(const ChartedSpace& s, const Vec& x0, const Vec& v0_in, double horizon,
                               const TransverseOptions& opt) {
    if (!(horizon > 0.0)) throw Error("transverse_data: horizon must be positive");
    if (!s.in_domain(x0)) throw DomainError("transverse_data: initial point outside chart domain");
    require_admissible(s, x0, v0_in);
    const int n = s.dim, m = n - 1;
    if (m < 1) throw Error("transverse_data: dimension must be at least 2");
    Vec v0 = unit_speed(s, x0, v0_in);
    Mat g0 = fundamental_tensor(s, x0, v0).matrix;
    Mat E0 = orthonormal_complement(g0, v0);

    const int sz = 2 * n + n * m + 2 * m * m;
    auto unpack_frame = [&](const Vec& y) { return Eigen::Map<const Mat>(y.data() + 2 * n, n, m); };
    OdeRhs rhs = [&](double, const Vec& y) {
        Vec x = y.head(n), v = y.segment(n, n);
        if (!s.in_domain(x)) throw DomainError("chart exit");
        CurvaturePack p = curvature_pack(s, x, v);
        Mat E = unpack_frame(y);
        Eigen::Map<const Mat> Yc(y.data() + 2 * n + n * m, m, m);
        Eigen::Map<const Mat> Ypc(y.data() + 2 * n + n * m + m * m, m, m);
        Mat Rm = E.transpose() * p.g * (p.R * E);  // Rm(a,b) = g(e_a, R e_b)
        Rm = 0.5 * (Rm + Rm.transpose()).eval();
        Vec f(sz);
        f.head(n) = v;
        f.segment(n, n) = -2.0 * p.G;
        Eigen::Map<Mat>(f.data() + 2 * n, n, m) = -p.N * E;
        Eigen::Map<Mat>(f.data() + 2 * n + n * m, m, m) = Ypc;
        Eigen::Map<Mat>(f.data() + 2 * n + n * m + m * m, m, m) = -Yc * Rm;
        return f;
    };
    Vec y0 = Vec::Zero(sz);
    y0.head(n) = x0;
    y0.segment(n, n) = v0;
    Eigen::Map<Mat>(y0.data() + 2 * n, n, m) = E0;
    Eigen::Map<Mat>(y0.data() + 2 * n + n * m + m * m, m, m) = Mat::Identity(m, m);

    OdeOptions oo;
    oo.rtol = opt.tol;
    oo.atol = opt.tol * 1e-2;
    oo.y_max = 1e8;
    double dt = horizon / opt.grid_intervals;
    // The bare geodesic is cheap. If it stops early, end the coupled system at the
    // last grid node before that point rather than grinding toward the blow-up.
    GeodesicPath pre = integrate_geodesic(s, x0, v0, horizon, opt.tol, {});
    double t_end = horizon;
    if (!pre.completed) t_end = std::max(0.0, std::ceil(pre.t_reached / dt - 1.0 - 1e-9)) * dt;
    for (int k = 1; k < opt.grid_intervals && k * dt < t_end - 0.5 * dt; ++k) oo.stops.push_back(k * dt);
    oo.record_only_stops = true;
    OdeSolution sol = integrate_dp54(rhs, 0.0, y0, t_end, oo);
    if (!pre.completed && sol.completed) {
        sol.completed = false;
        sol.t_reached = pre.t_reached;
        sol.stop_reason = pre.stop_reason;
    }
    // drop a trailing off-grid node left by an early stop
    if (!sol.completed && sol.t.size() > 1) {
        double last = sol.t.back();
        double k = std::round(last / dt);
        if (std::abs(last - k * dt) > 1e-12 * std::max(1.0, horizon)) {
            sol.t.pop_back();
            sol.y.pop_back();
            sol.f.pop_back();
        }
    }

    TransverseData td;
    td.m = m;
    td.dt = dt;
    td.path.t_end = horizon;
    td.path.completed = sol.completed;
    td.path.t_reached = sol.t_reached;
    td.path.stop_reason = sol.stop_reason;
    double L0 = s.L(x0, v0);
    for (std::size_t k = 0; k < sol.t.size(); ++k) {
        const Vec& y = sol.y[k];
        Vec x = y.head(n), v = y.segment(n, n);
        td.path.t.push_back(sol.t[k]);
        td.path.x.push_back(x);
        td.path.v.push_back(v);
        td.path.a.push_back(sol.f[k].segment(n, n));
        td.path.lagrangian_drift = std::max(td.path.lagrangian_drift, std::abs(s.L(x, v) - L0));
        Mat E = unpack_frame(y);
        Mat Yk = Eigen::Map<const Mat>(y.data() + 2 * n + n * m, m, m);
        Mat Ypk = Eigen::Map<const Mat>(y.data() + 2 * n + n * m + m * m, m, m);
        CurvaturePack p = curvature_pack(s, x, v);
        Mat Rm = E.transpose() * p.g * (p.R * E);
        Rm = 0.5 * (Rm + Rm.transpose()).eval();
        Mat G = E.transpose() * p.g * E;
        double drift = (G - Mat::Identity(m, m)).cwiseAbs().maxCoeff();
        drift = std::max(drift, (v.transpose() * p.g * E).cwiseAbs().maxCoeff());
        td.frame_drift = std::max(td.frame_drift, drift);
        td.frame.push_back(E);
        td.Y.push_back(Yk);
        td.Yp.push_back(Ypk);
        td.Rm.push_back(Rm);
        Mat A = Yk * Yk.transpose();
        td.A.push_back(A);
        td.det_A.push_back(A.determinant());
        Mat B = Mat::Constant(m, m, std::numeric_limits<double>::quiet_NaN());
        Eigen::FullPivLU<Mat> lu(Yk);
        if (k > 0 && lu.isInvertible()) B = Ypk * lu.inverse();
        td.B.push_back(B);
        td.trace_B.push_back(B.trace());
        td.Rmat.push_back(Yk * Rm * Yk.transpose());
        td.ricci.push_back(p.R.trace());
    }
    if (td.frame_drift > opt.frame_tolerance)
        throw NumericalError("transverse_data: parallel frame drift " + std::to_string(td.frame_drift) +
                             " exceeds tolerance");
    td.singular_t = first_conjugate_point(td);
    return td;
}

namespace {
double sigma_min(const Mat& Y) {
    Eigen::JacobiSVD<Mat> svd(Y);
    return svd.singularValues()(svd.singularValues().size() - 1);
}
}  // namespace

std::optional<double> first_conjugate_point(const TransverseData& td) {
    const auto& t = td.path.t;
    std::size_t N = t.size();
    if (N < 3) return std::nullopt;
    auto detY = [&](double tq) { return td.Y_at(tq).determinant(); };
    double scale = 1.0;
    for (std::size_t k = 1; k < N; ++k) {
        scale = std::max(scale, td.det_A[k]);
        double d0 = td.Y[k].determinant();
        if (d0 == 0.0) return t[k];
        if (k + 1 < N) {
            double d1 = td.Y[k + 1].determinant();
            if (d1 != 0.0 && (d0 > 0.0) != (d1 > 0.0)) {
                double lo = t[k], hi = t[k + 1], flo = d0;
                for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
                    double mid = 0.5 * (lo + hi);
                    double fm = detY(mid);
                    if ((fm > 0.0) == (flo > 0.0)) { lo = mid; flo = fm; } else { hi = mid; }
                }
                return 0.5 * (lo + hi);
            }
            // tangential zero: interior local minimum of the smallest singular value
            if (k >= 2) {
                double sm = sigma_min(td.Y[k - 1]), s0 = sigma_min(td.Y[k]), sp = sigma_min(td.Y[k + 1]);
                if (s0 <= sm && s0 <= sp) {
                    double a = t[k - 1], b = t[k + 1];
                    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
                    double c = b - gr * (b - a), d = a + gr * (b - a);
                    double fc = sigma_min(td.Y_at(c)), fd = sigma_min(td.Y_at(d));
                    while (b - a > 1e-9) {
                        if (fc < fd) { b = d; d = c; fd = fc; c = b - gr * (b - a); fc = sigma_min(td.Y_at(c)); }
                        else { a = c; c = d; fc = fd; d = a + gr * (b - a); fd = sigma_min(td.Y_at(d)); }
                    }
                    double ts = 0.5 * (a + b);
                    Mat Ys = td.Y_at(ts);
                    double detA = (Ys * Ys.transpose()).determinant();
                    if (detA <= 1e-10 * scale) return ts;
                }
            }
        }
    }
    return std::nullopt;
}

MatrixLemmaResiduals matrix_lemma_residuals(const ChartedSpace& s, const TransverseData& td, double window) {
    MatrixLemmaResiduals r;
    std::size_t K = td.size();
    if (K < 8) return r;
    int m = td.m;
    std::vector<std::vector<double>> entries(m * m, std::vector<double>(K));
    for (std::size_t k = 0; k < K; ++k)
        for (int i = 0; i < m * m; ++i) entries[i][k] = td.A[k](i % m, i / m);
    std::vector<GridDerivatives> der;
    for (const auto& e : entries) der.push_back(uniform_derivatives(e, td.dt));
    double T = td.path.t.back();
    double t_hi = td.singular_t ? *td.singular_t - window * T : T;
    for (std::size_t k = 1; k < K; ++k) {
        double t = td.path.t[k];
        if (t < window * T || t > t_hi) continue;
        const Mat &A = td.A[k], &B = td.B[k], &R = td.Rmat[k];
        Mat dA(m, m), ddA(m, m);
        for (int i = 0; i < m * m; ++i) {
            dA(i % m, i / m) = der[i].d1[k];
            ddA(i % m, i / m) = der[i].d2[k];
        }
        Mat BA = B * A;
        double scale = std::max({1.0, A.cwiseAbs().maxCoeff(), BA.cwiseAbs().maxCoeff(), R.cwiseAbs().maxCoeff()});
        r.commutator = std::max(r.commutator, (BA - A * B.transpose()).cwiseAbs().maxCoeff() / scale);
        r.first = std::max(r.first, (dA - 2.0 * BA).cwiseAbs().maxCoeff() / scale);
        r.second = std::max(r.second, (ddA - 2.0 * B * BA + 2.0 * R).cwiseAbs().maxCoeff() / scale);
        ++r.nodes;
    }
    // Gauss lemma: the Jacobi fields stay g-orthogonal to the velocity
    for (std::size_t k = 1; k < K; ++k) {
        const Vec& v = td.path.v[k];
        Mat g = vertical_hessian(s, td.path.x[k], v);
        Mat E = td.jacobi_fields(k);
        double scale = std::max(1.0, E.cwiseAbs().maxCoeff());
        r.gauss = std::max(r.gauss, (v.transpose() * g * E).cwiseAbs().maxCoeff() / scale);
    }
    return r;
}

std::string transverse_csv(const TransverseData& td) {
    std::ostringstream os;
    os << "t,detA,traceB\n";
    char buf[128];
    for (std::size_t k = 0; k < td.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", td.path.t[k], td.det_A[k], td.trace_B[k]);
        os << buf;
    }
    return os.str();
}

}  // namespace finslercomp

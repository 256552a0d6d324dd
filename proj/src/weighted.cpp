#include "finslercomp/weighted.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "finslercomp/curvature.hpp"
#include "finslercomp/detail/jets.hpp"
#include "finslercomp/numerics.hpp"
#include "finslercomp/util.hpp"

namespace finslercomp {

std::string ExtN::str() const {
    if (kind == plus_inf) return "inf";
    if (kind == minus_inf) return "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, r.ptr);
}

int weighted_dimension(int dim, Signature sig) { return sig == Signature::positive ? dim : dim - 1; }

namespace {

std::string fmt(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

}  // namespace

double epsilon_range_constant(int dim, Signature sig, ExtN N, double eps) {
    int n = weighted_dimension(dim, sig);
    int m = dim - 1;
    // lower end of the admissible N range: 1 (positive) or 0 (lorentzian)
    double N0 = sig == Signature::positive ? 1.0 : 0.0;
    if (m < 1 || n < 1) throw HypothesisError("epsilon range: dimension too small");
    if (!std::isfinite(eps)) throw HypothesisError("epsilon range: eps must be finite");
    std::string nn = std::to_string(n), n0 = fmt(N0);

    if (N.kind == ExtN::minus_inf)
        throw HypothesisError("epsilon range: N = -inf is not admissible; use N in (-inf, " + n0 + "] or [" + nn +
                              ", inf]");
    if (N.kind == ExtN::plus_inf) {
        if (!(std::abs(eps) < 1.0))
            throw HypothesisError("epsilon range: for N = inf, eps must lie in (-1, 1); got " + fmt(eps));
        return (1.0 - eps * eps) / m;
    }
    double Nv = N.value;
    if (!std::isfinite(Nv)) throw HypothesisError("epsilon range: N must be a number or inf");
    if (Nv > N0 && Nv < n)
        throw HypothesisError("epsilon range: N = " + fmt(Nv) + " lies in the forbidden interval (" + n0 + ", " + nn +
                              "); admissible N are (-inf, " + n0 + "] and [" + nn + ", inf]");
    if (Nv == N0) {
        if (eps != 0.0)
            throw HypothesisError("epsilon range: for N = " + n0 + ", eps must be 0; got " + fmt(eps));
        return 1.0 / m;
    }
    if (Nv == n) return 1.0 / m;
    double bound = std::sqrt((Nv - N0) / (Nv - n));
    if (!(std::abs(eps) < bound))
        throw HypothesisError("epsilon range: for N = " + fmt(Nv) + ", eps must lie in (" + fmt(-bound) + ", " +
                              fmt(bound) + "); got " + fmt(eps));
    return (1.0 - eps * eps * (Nv - n) / (Nv - N0)) / m;
}

ComparisonParams make_params(int dim, Signature sig, ExtN N, double eps, double K, double a, double b) {
    if (!(a > 0.0)) throw HypothesisError("comparison params: a must be positive; got " + fmt(a));
    if (!(b >= a)) throw HypothesisError("comparison params: b must satisfy b >= a; got a=" + fmt(a) + ", b=" + fmt(b));
    if (!std::isfinite(K)) throw HypothesisError("comparison params: K must be finite");
    ComparisonParams p;
    p.N = N;
    p.eps = eps;
    p.K = K;
    p.a = a;
    p.b = b;
    p.c = epsilon_range_constant(dim, sig, N, eps);
    p.m = dim - 1;
    p.n = weighted_dimension(dim, sig);
    p.signature = sig;
    return p;
}

ReportParams report_params(const ComparisonParams& p) {
    ReportParams r;
    r.N = p.N.as_double();
    r.eps = p.eps;
    r.K = p.K;
    r.a = p.a;
    r.b = p.b;
    r.c = p.c;
    return r;
}

namespace {

// d/ds psi(x + s v, v - 2 s G(x, v)) at s = 0, evaluated over T.
template <class T>
T flow_derivative(const ChartedSpace& s, const T* x, const T* v) {
    int n = s.dim;
    auto G = detail::spray<T>(s.lagrangian, n, x, v);
    std::vector<Dual<T>> X(n), V(n);
    for (int q = 0; q < n; ++q) {
        X[q] = Dual<T>(x[q], v[q]);
        V[q] = Dual<T>(v[q], T(-2.0) * G[q]);
    }
    return (*s.weight)(X.data(), V.data()).b;
}

}  // namespace

FlowDerivatives psi_flow_derivatives(const ChartedSpace& s, const Vec& x, const Vec& v) {
    FlowDerivatives d;
    if (!s.weighted()) return d;
    require_admissible(s, x, v);
    int n = s.dim;
    d.psi = s.psi(x, v);
    d.dpsi = flow_derivative<double>(s, x.data(), v.data());
    auto G = detail::spray<double>(s.lagrangian, n, x.data(), v.data());
    std::vector<D1> X(n), V(n);
    for (int q = 0; q < n; ++q) {
        X[q] = D1(x[q], v[q]);
        V[q] = D1(v[q], -2.0 * G[q]);
    }
    d.ddpsi = flow_derivative<D1>(s, X.data(), V.data()).b;
    return d;
}

double weighted_ricci_from(double ric, double dpsi, double ddpsi, ExtN N, int n) {
    if (N.is_infinite()) return ric + ddpsi;
    if (N.value == n) {
        if (dpsi == 0.0) return ric + ddpsi;
        return -std::numeric_limits<double>::infinity();
    }
    return ric + ddpsi - dpsi * dpsi / (N.value - n);
}

double weighted_ricci(const ChartedSpace& s, const Vec& x, const Vec& v, ExtN N) {
    double ric = ricci_scalar(s, x, v);
    FlowDerivatives d = psi_flow_derivatives(s, x, v);
    return weighted_ricci_from(ric, d.dpsi, d.ddpsi, N, weighted_dimension(s.dim, s.signature));
}

namespace {

// First and second derivatives of samples on an arbitrary increasing grid,
// from 7-point local polynomial stencils.
void grid_derivatives(const std::vector<double>& t, const std::vector<double>& f, std::vector<double>& d1,
                      std::vector<double>& d2) {
    int N = int(t.size());
    d1.assign(N, 0.0);
    d2.assign(N, 0.0);
    if (N < 3) {
        if (N == 2) d1[0] = d1[1] = (f[1] - f[0]) / (t[1] - t[0]);
        return;
    }
    int w = std::min(7, N);
    std::vector<double> nodes(w);
    for (int i = 0; i < N; ++i) {
        int start = std::clamp(i - w / 2, 0, N - w);
        for (int j = 0; j < w; ++j) nodes[j] = t[start + j] - t[i];
        auto c = fd_weights(0.0, nodes, 2);
        for (int j = 0; j < w; ++j) {
            d1[i] += c[1][j] * f[start + j];
            d2[i] += c[2][j] * f[start + j];
        }
    }
}

std::size_t segment(const std::vector<double>& t, double tq) {
    if (t.size() < 2) return 0;
    auto it = std::upper_bound(t.begin(), t.end(), tq);
    std::size_t k = it == t.begin() ? 0 : std::size_t(it - t.begin()) - 1;
    return std::min(k, t.size() - 2);
}

}  // namespace

double WeightAlongGeodesic::psi_at(double tq) const {
    if (t.size() < 2) return psi.empty() ? 0.0 : psi[0];
    std::size_t k = segment(t, tq);
    return quintic_hermite(t[k], t[k + 1], psi[k], psi[k + 1], dpsi[k], dpsi[k + 1], ddpsi[k], ddpsi[k + 1], tq);
}

double WeightAlongGeodesic::phi_at(double tq) const {
    if (eps == 1.0 || phi.empty()) return tq;
    if (t.size() < 2) return phi[0];
    std::size_t k = segment(t, tq);
    double r = 2.0 * (eps - 1.0) / m;
    auto d = [&](std::size_t i) { return std::exp(r * psi[i]); };
    auto s = [&](std::size_t i) { return std::exp(r * psi[i]) * r * dpsi[i]; };
    return quintic_hermite(t[k], t[k + 1], phi[k], phi[k + 1], d(k), d(k + 1), s(k), s(k + 1), tq);
}

double WeightAlongGeodesic::phi_inverse(double tau) const {
    if (eps == 1.0 || phi.empty()) return tau;
    if (t.size() < 2) return t.empty() ? tau : t[0];
    // locate the segment on the phi grid, then bisection + Newton on the interpolant
    auto it = std::upper_bound(phi.begin(), phi.end(), tau);
    std::size_t k = it == phi.begin() ? 0 : std::size_t(it - phi.begin()) - 1;
    k = std::min(k, phi.size() - 2);
    double lo = t[k], hi = t[k + 1];
    double r = 2.0 * (eps - 1.0) / m;
    double x = lo + (hi - lo) * std::clamp((tau - phi[k]) / (phi[k + 1] - phi[k]), 0.0, 1.0);
    for (int it2 = 0; it2 < 100; ++it2) {
        double f = phi_at(x) - tau;
        if (f > 0.0) hi = x;
        else lo = x;
        double dx = f / std::exp(r * psi_at(x));
        double xn = x - dx;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-15 * std::max(1.0, std::abs(x))) return xn;
        x = xn;
    }
    return x;
}

WeightAlongGeodesic weight_along(const ChartedSpace& s, const GeodesicPath& path, double cross_check_tol) {
    WeightAlongGeodesic w;
    w.t = path.t;
    std::size_t K = path.size();
    w.psi.assign(K, 0.0);
    w.dpsi.assign(K, 0.0);
    w.ddpsi.assign(K, 0.0);
    w.m = s.m();
    if (!s.weighted()) return w;

    std::vector<FlowDerivatives> dual(K);
    parallel_for(int(K), [&](int k) { dual[k] = psi_flow_derivatives(s, path.x[k], path.v[k]); });
    for (std::size_t k = 0; k < K; ++k) {
        w.psi[k] = dual[k].psi;
        w.dpsi[k] = dual[k].dpsi;
        w.ddpsi[k] = dual[k].ddpsi;
    }
    // grid differentiation as an independent route
    std::vector<double> g1, g2;
    grid_derivatives(w.t, w.psi, g1, g2);
    double gap = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        gap = std::max(gap, std::abs(g1[k] - w.dpsi[k]) / std::max(1.0, std::abs(w.dpsi[k])));
        gap = std::max(gap, std::abs(g2[k] - w.ddpsi[k]) / std::max(1.0, std::abs(w.ddpsi[k])));
    }
    w.dual_disagreement = gap;
    w.dual_checked = K >= 7;
    if (w.dual_checked && !(gap <= cross_check_tol))
        throw NumericalError("weight_along: grid and dual derivatives of psi disagree by " + fmt(gap) +
                             " (limit " + fmt(cross_check_tol) + "); refine the grid");
    return w;
}

WeightAlongGeodesic weight_from_density(const ChartedSpace& s, const std::function<double(const Vec&)>& density,
                                        const GeodesicPath& path) {
    WeightAlongGeodesic w;
    w.t = path.t;
    w.m = s.m();
    std::size_t K = path.size();
    w.psi.assign(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        double rho = density(path.x[k]);
        if (!(rho > 0.0))
            throw DomainError("weight_from_density: density must be positive; got " + fmt(rho) + " at t = " +
                              fmt(path.t[k]));
        double det = vertical_hessian(s, path.x[k], path.v[k]).determinant();
        w.psi[k] = std::log(std::sqrt(std::abs(det)) / rho);
    }
    grid_derivatives(w.t, w.psi, w.dpsi, w.ddpsi);
    return w;
}

Reparametrization reparametrize(WeightAlongGeodesic& w, double eps, int m) {
    w.eps = eps;
    w.m = m;
    Reparametrization r;
    std::size_t K = w.t.size();
    w.phi.assign(K, 0.0);
    if (eps == 1.0) {
        w.phi = w.t;
    } else {
        double k2 = 2.0 * (eps - 1.0) / m;
        auto f = [&](double s) { return std::exp(k2 * w.psi_at(s)); };
        if (K > 0) w.phi[0] = w.t[0];
        for (std::size_t k = 1; k < K; ++k) w.phi[k] = w.phi[k - 1] + integrate(f, w.t[k - 1], w.t[k], 1e-11);
    }
    r.phi = w.phi;
    if (K > 1) {
        double H = w.t.back(), t0 = w.t.front();
        r.completeness_integral = w.phi.back() - w.phi.front();
        double half = 0.5 * (H + t0);
        r.growth_rate = (w.phi.back() - w.phi_at(half)) / (H - half);
    }
    return r;
}

std::pair<double, double> weight_factor_range(const WeightAlongGeodesic& w, double eps, int m) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double p : w.psi) {
        double f = std::exp(-2.0 * (eps - 1.0) * p / m);
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    return {lo, hi};
}

namespace {

// Position in the chain Ric_n <= Ric_N (N > n ascending) <= Ric_inf = Ric_-inf <= Ric_N' (N' ascending).
std::pair<int, double> chain_key(const ExtN& N, int n) {
    if (N.kind == ExtN::plus_inf) return {1, 0.0};
    if (N.kind == ExtN::minus_inf) return {2, 0.0};
    if (N.value >= n) return {0, N.value};
    return {3, N.value};
}

}  // namespace

CheckReport monotonicity_check(const ChartedSpace& s, const std::vector<std::pair<Vec, Vec>>& samples,
                               const std::vector<ExtN>& N_list, const WeightedRicciFn& ric) {
    int n = weighted_dimension(s.dim, s.signature);
    std::vector<ExtN> order = N_list;
    std::stable_sort(order.begin(), order.end(),
                     [n](const ExtN& a, const ExtN& b) { return chain_key(a, n) < chain_key(b, n); });

    CheckReport rep;
    rep.name = "monotonicity";
    rep.tolerance = 1e-10;
    std::vector<std::vector<double>> values(samples.size(), std::vector<double>(order.size()));
    parallel_for(int(samples.size()), [&](int i) {
        const auto& [x, v] = samples[i];
        if (ric) {
            for (std::size_t j = 0; j < order.size(); ++j) values[i][j] = ric(x, v, order[j]);
            return;
        }
        double r = ricci_scalar(s, x, v);
        FlowDerivatives d = psi_flow_derivatives(s, x, v);
        for (std::size_t j = 0; j < order.size(); ++j) values[i][j] = weighted_ricci_from(r, d.dpsi, d.ddpsi, order[j], n);
    });
    int violations = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j + 1 < order.size(); ++j) {
            double a = values[i][j], b = values[i][j + 1];
            double r;
            if (std::isinf(a) && a < 0) r = 0.0;  // -inf at the bottom of the chain
            else if (std::isnan(a) || std::isnan(b)) r = std::numeric_limits<double>::quiet_NaN();
            else r = (a - b) / std::max({1.0, std::abs(a), std::abs(b)});
            if (!(r <= worst)) worst = r;
        }
        if (!(worst <= rep.tolerance)) ++violations;
        rep.add(double(i), worst);
    }
    rep.values["samples"] = double(samples.size());
    rep.values["violations"] = violations;
    std::string chain;
    for (const auto& N : order) chain += (chain.empty() ? "" : " <= ") + ("Ric_" + N.str());
    rep.notes.push_back("chain: " + chain);
    rep.finalize();
    return rep;
}

std::string weight_csv(const WeightAlongGeodesic& w) {
    std::ostringstream os;
    os << "t,psi,dpsi,ddpsi,phi\n";
    char buf[256];
    for (std::size_t k = 0; k < w.t.size(); ++k) {
        double ph = k < w.phi.size() ? w.phi[k] : w.t[k];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", w.t[k], w.psi[k], w.dpsi[k], w.ddpsi[k], ph);
        os << buf;
    }
    return os.str();
}

}  // namespace finslercomp

#include "finslercomp/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "finslercomp/detail/jets.hpp"
#include "finslercomp/numerics.hpp"
#include "finslercomp/util.hpp"

namespace finslercomp {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string vec_str(const Vec& v) {
    std::string s = "(";
    for (int i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
    return s + ")";
}

void require_lorentzian(const ChartedSpace& s, const char* who) {
    if (s.signature != Signature::lorentzian) throw Error(std::string(who) + ": requires a lorentzian space");
}

Vec orientation(const ChartedSpace& s, const Vec& x) {
    return s.time_orientation ? s.time_orientation(x) : Vec::Unit(s.dim, 0);
}

bool future_timelike(const ChartedSpace& s, const Vec& x, const Vec& v) {
    return s.L(x, v) < 0.0 && future_directed(s, x, v);
}

// Unit directions spread over the Euclidean sphere (deterministic).
std::vector<Vec> sphere_directions(int n, int count) {
    std::vector<Vec> out;
    out.reserve(count);
    if (n == 2) {
        for (int j = 0; j < count; ++j) {
            double th = 2.0 * M_PI * j / count;
            Vec u(2);
            u << std::cos(th), std::sin(th);
            out.push_back(u);
        }
        return out;
    }
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    if (n > 12) throw Error("polar_cone_test: dimension too large");
    for (int k = 1; k <= count; ++k) {
        Vec z(n);
        for (int i = 0; i < n; i += 2) {
            double u1 = std::max(halton(k, primes[i]), 1e-300);
            double u2 = halton(k, primes[std::min(i + 1, n - 1)]);
            double rad = std::sqrt(-2.0 * std::log(u1));
            z[i] = rad * std::cos(2.0 * M_PI * u2);
            if (i + 1 < n) z[i + 1] = rad * std::sin(2.0 * M_PI * u2);
        }
        out.push_back(z.normalized());
    }
    return out;
}

Mat metric(const ChartedSpace& s, const Vec& x, const Vec& v) { return vertical_hessian(s, x, v); }

}  // namespace

std::string to_string(CausalKind k) {
    switch (k) {
        case CausalKind::timelike: return "timelike";
        case CausalKind::lightlike: return "lightlike";
        case CausalKind::spacelike: return "spacelike";
        default: return "zero";
    }
}

CausalClass classify(const ChartedSpace& s, const Vec& x, const Vec& v, double band) {
    require_lorentzian(s, "classify");
    CausalClass c;
    double n2 = v.squaredNorm();
    if (n2 == 0.0) return c;
    double L = s.L(x, v);
    if (std::abs(L) <= band * n2) c.kind = CausalKind::lightlike;
    else if (L < 0.0) c.kind = CausalKind::timelike;
    else c.kind = CausalKind::spacelike;
    if (c.kind != CausalKind::spacelike) c.future = future_directed(s, x, v);
    return c;
}

Vec legendre(const ChartedSpace& s, const Vec& x, const Vec& v) {
    int n = s.dim;
    if (v.size() != n || v.squaredNorm() == 0.0) throw DomainError("legendre: vector must be nonzero");
    std::vector<D1> X(n), V(n);
    for (int i = 0; i < n; ++i) X[i] = D1(x[i], 0.0);
    Vec out(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) V[j] = D1(v[j], i == j ? 1.0 : 0.0);
        out[i] = s.lagrangian(X.data(), V.data()).b;
    }
    return out;
}

PolarConeTest polar_cone_test(const ChartedSpace& s, const Vec& x, const Vec& omega, double margin, int resolution) {
    require_lorentzian(s, "polar_cone_test");
    int n = s.dim;
    if (omega.size() != n) throw Error("polar_cone_test: covector has wrong dimension");
    PolarConeTest res;
    double on = omega.norm();
    if (on == 0.0) return res;
    Vec w = omega / on;
    Vec X = orientation(s, x);
    X.normalize();
    int count = resolution > 0 ? resolution : (n == 2 ? 720 : 2000);
    auto dirs = sphere_directions(n, count);
    double best = w.dot(X);
    constexpr int kMarch = 256;
    for (const Vec& u : dirs) {
        if (future_timelike(s, x, u)) {
            best = std::max(best, w.dot(u));
            continue;
        }
        // first exit of the sweep X -> u from the cone gives a light-cone point
        if (X.dot(u) < -1.0 + 1e-12) continue;
        double lo = 0.0, hi = 1.0;
        for (int k = 1; k <= kMarch; ++k) {
            double sk = double(k) / kMarch;
            if (!(s.L(x, angular_sweep(X, u, sk)) < 0.0)) {
                hi = sk;
                break;
            }
            lo = sk;
        }
        for (int it = 0; it < 50; ++it) {
            double mid = 0.5 * (lo + hi);
            if (s.L(x, angular_sweep(X, u, mid)) < 0.0) lo = mid;
            else hi = mid;
        }
        best = std::max(best, w.dot(angular_sweep(X, u, lo)));
    }
    res.max_value = best;
    res.directions = count;
    res.member = best < -margin;
    return res;
}

Vec legendre_inverse(const ChartedSpace& s, const Vec& x, const Vec& omega, const LegendreInverseOptions& opt) {
    require_lorentzian(s, "legendre_inverse");
    int n = s.dim;
    if (omega.size() != n || !omega.allFinite()) throw DomainError("legendre_inverse: bad covector");
    if (opt.check_polar) {
        auto pc = polar_cone_test(s, x, omega);
        if (!pc.member)
            throw DomainError("legendre_inverse: covector " + vec_str(omega) +
                              " is not in the polar cone (max omega(u)/|omega| = " + num(pc.max_value) + ")");
    }
    Vec X = orientation(s, x);
    Vec v = metric(s, x, X).ldlt().solve(omega);
    if (!future_timelike(s, x, v)) {
        double lam = omega.dot(X) / (2.0 * s.L(x, X));
        if (!(lam > 0.0)) throw DomainError("legendre_inverse: covector is not negative on the time orientation");
        v = lam * X;
    }
    double scale = std::max(1.0, omega.norm());
    Vec r = legendre(s, x, v) - omega;
    double rn = r.norm();
    for (int it = 0; it < opt.max_iter; ++it) {
        if (rn <= opt.tol * scale) return v;
        Vec step = metric(s, x, v).lu().solve(-r);
        double alpha = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
            Vec cand = v + alpha * step;
            if (!future_timelike(s, x, cand)) continue;
            Vec rc = legendre(s, x, cand) - omega;
            if (rc.norm() < rn) {
                v = cand;
                r = rc;
                rn = rc.norm();
                moved = true;
                break;
            }
        }
        if (!moved) {
            // stagnation at round-off level counts as converged
            if (rn <= 1e-10 * scale) return v;
            break;
        }
    }
    if (rn <= 1e-10 * scale) return v;
    throw NumericalError("legendre_inverse: Newton did not converge; last iterate " + vec_str(v) + ", residual " +
                         num(rn));
}

double dual_lagrangian(const ChartedSpace& s, const Vec& x, const Vec& omega) {
    return s.L(x, legendre_inverse(s, x, omega));
}

Mat dual_metric(const ChartedSpace& s, const Vec& x, const Vec& omega) {
    int n = s.dim;
    LegendreInverseOptions lo;
    lo.check_polar = false;
    // validate once at the center
    Vec center = legendre_inverse(s, x, omega);
    (void)center;
    double h = 1e-4 * omega.norm();
    Mat G(n, n);
    for (int a = 0; a < n; ++a) {
        Vec e = Vec::Unit(n, a) * h;
        // fourth-order central difference
        Vec d = (-legendre_inverse(s, x, omega + 2 * e, lo) + 8.0 * legendre_inverse(s, x, omega + e, lo) -
                 8.0 * legendre_inverse(s, x, omega - e, lo) + legendre_inverse(s, x, omega - 2 * e, lo)) /
                (12.0 * h);
        G.col(a) = d;
    }
    return 0.5 * (G + G.transpose());
}

namespace {

void fill_weighted(LagrangeTensorData& d) {
    const double eps = d.eps;
    const int n = d.n;
    reparametrize(d.weight, eps, n);
    d.B_eps.assign(d.valid, Mat::Constant(n, n, kNaN));
    d.sigma_eps.assign(d.valid, Mat::Constant(n, n, kNaN));
    d.theta_eps.assign(d.valid, kNaN);
    for (std::size_t k = 1; k < d.valid; ++k) {
        double e = std::exp(-2.0 * (eps - 1.0) * d.weight.psi[k] / n);
        double dpsi = d.weight.dpsi[k];
        d.B_eps[k] = e * (d.B[k] - (dpsi / n) * Mat::Identity(n, n));
        d.theta_eps[k] = e * (d.theta[k] - dpsi);
        d.sigma_eps[k] = e * d.sigma[k];
    }
}

}  // namespace

LagrangeTensorData lagrange_tensor(const ChartedSpace& s, const Ray& ray, double horizon, double eps,
                                   const TransverseOptions& opt) {
    require_lorentzian(s, "lagrange_tensor");
    LagrangeTensorData d;
    d.td = transverse_data(s, ray.x0, ray.v0, horizon, opt);
    d.weight = weight_along(s, d.td.path);
    d.eps = eps;
    d.n = d.td.m;
    d.conjugate_t = d.td.singular_t;
    const int n = d.n;
    std::size_t K = d.td.size();
    d.valid = K;
    if (d.conjugate_t) {
        d.valid = 0;
        while (d.valid < K && d.td.path.t[d.valid] < *d.conjugate_t) ++d.valid;
        d.truncated = true;
    }
    if (!d.td.path.completed) d.truncated = true;
    Mat nan = Mat::Constant(n, n, kNaN);
    d.J.resize(d.valid);
    d.Jp.resize(d.valid);
    d.B.assign(d.valid, nan);
    d.sigma.assign(d.valid, nan);
    d.theta.assign(d.valid, kNaN);
    for (std::size_t k = 0; k < d.valid; ++k) {
        // Jacobi fields are the rows of Y; J maps e_a(0)-coefficients to fields
        d.J[k] = d.td.Y[k].transpose();
        d.Jp[k] = d.td.Yp[k].transpose();
        Mat lag = d.J[k].transpose() * d.Jp[k] - d.Jp[k].transpose() * d.J[k];
        d.lagrange_residual = std::max(d.lagrange_residual, lag.cwiseAbs().maxCoeff());
        if (k == 0) continue;
        Mat B = d.Jp[k] * d.J[k].inverse();
        d.symmetry_residual =
            std::max(d.symmetry_residual, (B - B.transpose()).cwiseAbs().maxCoeff() / std::max(1.0, B.norm()));
        d.B[k] = 0.5 * (B + B.transpose());
        d.theta[k] = d.B[k].trace();
        d.sigma[k] = d.B[k] - (d.theta[k] / n) * Mat::Identity(n, n);
    }
    fill_weighted(d);
    return d;
}

LagrangeTensorData with_eps(const LagrangeTensorData& d, double eps) {
    LagrangeTensorData out = d;
    out.eps = eps;
    fill_weighted(out);
    return out;
}

CheckReport check_raychaudhuri(const LagrangeTensorData& d, ExtN N, double eps, const CheckOptions& opt) {
    if (eps == d.eps) return check_raychaudhuri(d, N, opt);
    return check_raychaudhuri(with_eps(d, eps), N, opt);
}

CheckReport check_raychaudhuri(const LagrangeTensorData& d, ExtN N, const CheckOptions& opt) {
    const int n = d.n;
    double c = epsilon_range_constant(n + 1, Signature::lorentzian, N, d.eps);
    CheckReport rep;
    rep.name = "raychaudhuri";
    ReportParams rp;
    rp.N = N.as_double();
    rp.eps = d.eps;
    rp.c = c;
    rep.params = rp;
    rep.tolerance = opt.tol;
    if (d.valid < 8) {
        rep.notes.push_back("too few nodes before the conjugate point");
        rep.max_violation = kNaN;
        rep.finalize();
        return rep;
    }
    std::vector<double> th(d.theta_eps.begin() + 1, d.theta_eps.end());
    GridDerivatives dth = uniform_derivatives(th, d.td.dt);
    const auto& w = d.weight;
    double t_full = d.t().back();
    double t_lo = opt.window * t_full;
    double t_hi = d.conjugate_t ? *d.conjugate_t - opt.window * t_full : kInf;
    double max_abs = 0.0;
    for (std::size_t k = 1; k < d.valid; ++k) {
        double t = d.t()[k];
        if (t < t_lo || t > t_hi) continue;
        double e = std::exp(-2.0 * (d.eps - 1.0) * w.psi[k] / n);
        double lhs = e * dth.d1[k - 1];  // divide by phi' = 1/e
        double ricN = weighted_ricci_from(d.td.ricci[k], w.dpsi[k], w.ddpsi[k], N, n) * e * e;
        double shear = (d.sigma_eps[k] * d.sigma_eps[k]).trace();
        double ct2 = c * d.theta_eps[k] * d.theta_eps[k];
        double rhs = -ricN - shear - ct2;
        double res;
        if (std::isinf(rhs) && rhs > 0) res = -kInf;
        else {
            double scale = std::max({1.0, ct2, std::abs(ricN)});
            res = (lhs - rhs) / scale;
            max_abs = std::max(max_abs, std::abs(res));
        }
        rep.add(w.phi[k], res);
    }
    if (rep.grid.empty()) {
        rep.notes.push_back("empty check window");
        rep.max_violation = kNaN;
    }
    rep.values["max_abs_residual"] = max_abs;
    rep.values["lagrange_residual"] = d.lagrange_residual;
    if (d.truncated) rep.notes.push_back("data truncated at t = " + num(d.t()[d.valid - 1]));
    rep.finalize();
    return rep;
}

CheckReport check_weighted_riccati(const LagrangeTensorData& d, double tol, double window) {
    const int n = d.n;
    CheckReport rep;
    rep.name = "weighted_riccati";
    rep.tolerance = tol;
    ReportParams rp;
    rp.eps = d.eps;
    rep.params = rp;
    if (d.valid < 8) {
        rep.notes.push_back("too few nodes before the conjugate point");
        rep.max_violation = kNaN;
        rep.finalize();
        return rep;
    }
    std::size_t cnt = d.valid - 1;
    std::vector<std::vector<double>> entries(n * n, std::vector<double>(cnt));
    for (std::size_t k = 1; k < d.valid; ++k)
        for (int i = 0; i < n * n; ++i) entries[i][k - 1] = d.B_eps[k](i % n, i / n);
    std::vector<GridDerivatives> der;
    for (const auto& e : entries) der.push_back(uniform_derivatives(e, d.td.dt));
    const auto& w = d.weight;
    double t_full = d.t().back();
    double t_lo = window * t_full;
    double t_hi = d.conjugate_t ? *d.conjugate_t - window * t_full : kInf;
    Mat I = Mat::Identity(n, n);
    for (std::size_t k = 1; k < d.valid; ++k) {
        double t = d.t()[k];
        if (t < t_lo || t > t_hi) continue;
        double e = std::exp(-2.0 * (d.eps - 1.0) * w.psi[k] / n);
        Mat dB(n, n);
        for (int i = 0; i < n * n; ++i) dB(i % n, i / n) = der[i].d1[k - 1];
        const Mat& Be = d.B_eps[k];
        Mat R0 = e * e * (d.td.Rm[k] + (w.ddpsi[k] + w.dpsi[k] * w.dpsi[k] / n) / n * I);
        Mat M = e * dB + (2.0 * d.eps / n) * (e * w.dpsi[k]) * Be + Be * Be + R0;
        double scale = std::max({1.0, (Be * Be).cwiseAbs().maxCoeff(), R0.cwiseAbs().maxCoeff()});
        rep.add(t, M.cwiseAbs().maxCoeff() / scale);
    }
    if (rep.grid.empty()) {
        rep.notes.push_back("empty check window");
        rep.max_violation = kNaN;
    }
    rep.finalize();
    return rep;
}

CheckReport check_spacetime_bonnet_myers(const ChartedSpace& s, const ComparisonParams& p,
                                         const std::vector<Ray>& rays, double horizon, const CheckOptions& opt) {
    require_lorentzian(s, "check_spacetime_bonnet_myers");
    CheckReport rep = check_bonnet_myers(s, p, rays, horizon, opt);
    rep.name = "spacetime_bonnet_myers";
    std::vector<CheckReport> bishops(rays.size());
    parallel_for(int(rays.size()), [&](int i) {
        bishops[i] = check_bishop(bishop_profile(s, rays[i], horizon, p, opt.transverse), opt);
    });
    double worst = -kInf;
    for (std::size_t i = 0; i < bishops.size(); ++i) {
        double mv = bishops[i].max_violation;
        rep.values["bishop_max_violation[" + std::to_string(i) + "]"] = mv;
        if (!(mv <= worst)) worst = mv;
        rep.add(double(rays.size() + i), mv);
    }
    rep.values["bishop_worst"] = worst;
    rep.notes.push_back("assumed hypothesis: radial geodesics are maximal on the checked window");
    rep.finalize();
    return rep;
}

double radial_dalembertian(const ChartedSpace& s, const Ray& ray, double t, const TransverseOptions& opt) {
    require_lorentzian(s, "radial_dalembertian");
    return radial_laplacian(s, ray, t, opt);
}

CheckReport check_lorentz_laplacian(const ChartedSpace& s, const ComparisonParams& p, const std::vector<Ray>& rays,
                                    double horizon, const CheckOptions& opt) {
    require_lorentzian(s, "check_lorentz_laplacian");
    CheckReport rep = check_laplacian_comparison(s, p, rays, horizon, opt);
    rep.name = "dalembertian_comparison";
    rep.notes.push_back("assumed hypotheses: global hyperbolicity; radial geodesics are maximal on the window");
    return rep;
}

double SectorSpec::cut(double frac) const {
    if (!tabulated()) return T;
    if (cut_table.size() == 1) return cut_table[0];
    double pos = std::clamp(frac, 0.0, 1.0) * double(cut_table.size() - 1);
    std::size_t i = std::min<std::size_t>(std::size_t(pos), cut_table.size() - 2);
    double u = pos - double(i);
    return (1.0 - u) * cut_table[i] + u * cut_table[i + 1];
}

double SectorSpec::cut_infimum() const {
    if (!tabulated()) return T;
    return *std::min_element(cut_table.begin(), cut_table.end());
}

namespace {

struct SectorNode {
    Vec y;
    double weight;  // parameter-space quadrature weight
};

// Quadrature nodes on the ball |y| <= rho in R^m. level 1 is the coarse rule.
std::vector<SectorNode> sector_nodes(int m, double rho, int angular, int level, std::uint64_t seed, int qmc_points) {
    std::vector<SectorNode> out;
    if (m == 1) {
        int cnt = (angular > 0 ? angular : 24) / level;
        auto [z, wz] = gauss_legendre(cnt, -rho, rho);
        for (int i = 0; i < cnt; ++i) out.push_back({Vec::Constant(1, z[i]), wz[i]});
    } else if (m == 2) {
        int nr = (angular > 0 ? angular : 12) / level, na = 2 * nr;
        auto [r, wr] = gauss_legendre(nr, 0.0, rho);
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < na; ++j) {
                double a = 2.0 * M_PI * (j + 0.5) / na;
                Vec y(2);
                y << r[i] * std::cos(a), r[i] * std::sin(a);
                out.push_back({y, wr[i] * r[i] * 2.0 * M_PI / na});
            }
    } else {
        static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31};
        if (m > 10) throw Error("sclv_volume_check: dimension too large");
        Rng rng(seed);
        std::vector<double> shift(m + 1);
        for (auto& v : shift) v = rng.uniform();
        double ball = std::pow(M_PI, 0.5 * m) / std::tgamma(0.5 * m + 1.0) * std::pow(rho, m);
        for (int k = 1; k <= qmc_points; ++k) {
            Vec z(m);
            for (int i = 0; i < m; i += 2) {
                double u1 = std::max(std::fmod(halton(k, primes[i]) + shift[i], 1.0), 1e-300);
                double u2 = std::fmod(halton(k, primes[std::min(i + 1, m - 1)]) + shift[std::min(i + 1, m - 1)], 1.0);
                double rad = std::sqrt(-2.0 * std::log(u1));
                z[i] = rad * std::cos(2.0 * M_PI * u2);
                if (i + 1 < m) z[i + 1] = rad * std::sin(2.0 * M_PI * u2);
            }
            double ur = std::fmod(halton(k, primes[m]) + shift[m], 1.0);
            out.push_back({z.normalized() * rho * std::pow(ur, 1.0 / m), ball / qmc_points});
        }
    }
    return out;
}

}  // namespace

CheckReport sclv_volume_check(const ChartedSpace& s, const ComparisonParams& p, const Vec& origin,
                              const SectorSpec& sector, double r, double R, const QuadratureSpec& q, double tol) {
    require_lorentzian(s, "sclv_volume_check");
    if (!(r > 0.0 && r < R && R <= 1.0)) throw Error("sclv_volume_check: requires 0 < r < R <= 1");
    if (!(sector.rapidity > 0.0)) throw DomainError("sclv_volume_check: sector rapidity must be positive");
    if (sector.tabulated() && p.K != 0.0)
        throw HypothesisError("sclv_volume_check: a tabulated cut function requires K = 0");
    if (!(sector.cut_infimum() > 0.0)) throw DomainError("sclv_volume_check: cut function must be positive");
    const int n = s.dim, m = n - 1;
    if (sector.axis.size() != n || !is_admissible(s, origin, sector.axis) ||
        !future_directed(s, origin, sector.axis))
        throw DomainError("sclv_volume_check: sector axis must be future timelike");
    Vec A = unit_speed(s, origin, sector.axis);
    Mat E = orthonormal_complement(metric(s, origin, A), A);
    double rho = std::tanh(sector.rapidity);

    struct Eval {
        std::vector<double> mass;  // {r-ball, R-ball}
        bool clipped = false;
        bool inadmissible = false;
    };
    auto run = [&](const std::vector<SectorNode>& nodes, double& vr, double& vR) {
        std::vector<Eval> ev(nodes.size());
        parallel_for(int(nodes.size()), [&](int i) {
            Vec wv = A + E * nodes[i].y;
            if (!is_admissible(s, origin, wv) || !future_directed(s, origin, wv)) {
                ev[i].inadmissible = true;
                return;
            }
            double F = finsler_norm(s, origin, wv);
            Mat g = metric(s, origin, wv);
            // Jacobian of y -> wv / F(wv); dF = -(g wv) / F
            Mat D = E / F + wv * ((wv.transpose() * g * E) / (F * F * F));
            double xi = std::sqrt(std::max(0.0, (D.transpose() * g * D).determinant()));
            double T = sector.cut(nodes[i].y.norm() / rho);
            bool c = false;
            auto ms = radial_masses(s, origin, wv / F, {r * T, R * T}, q.radial_intervals, &c);
            ev[i].clipped = c;
            ev[i].mass = {nodes[i].weight * xi * ms[0], nodes[i].weight * xi * ms[1]};
        });
        vr = vR = 0.0;
        for (const auto& e : ev) {
            if (e.inadmissible) throw DomainError("sclv_volume_check: sector leaves the timelike cone");
            if (e.clipped)
                throw HypothesisError("sclv_volume_check: a sector ray meets a conjugate point or leaves the chart "
                                      "before R T");
            vr += e.mass[0];
            vR += e.mass[1];
        }
    };

    // curvature and weight hypotheses along the axis and a few boundary rays
    std::vector<Ray> rays{{origin, A}};
    for (int a = 0; a < m; ++a)
        for (double sg : {1.0, -1.0}) rays.push_back({origin, Vec(A + sg * rho * E.col(a))});
    double Tmax = sector.tabulated() ? *std::max_element(sector.cut_table.begin(), sector.cut_table.end()) : sector.T;
    auto hs = validate_hypotheses(s, p, hypothesis_samples(s, rays, R * Tmax), true, true);

    double vr = 0.0, vR = 0.0, err = 0.0;
    if (m <= 2) {
        double vr2, vR2;
        run(sector_nodes(m, rho, q.angular, 1, q.seed, q.qmc_points), vr, vR);
        run(sector_nodes(m, rho, q.angular, 2, q.seed, q.qmc_points), vr2, vR2);
        err = std::max(std::abs(vr - vr2) / std::max(1e-300, vr), std::abs(vR - vR2) / std::max(1e-300, vR));
    } else {
        int reps = std::max(2, q.qmc_replicas);
        std::vector<double> ratios(reps);
        double sr = 0.0, sR = 0.0;
        for (int k = 0; k < reps; ++k) {
            double a, b;
            run(sector_nodes(m, rho, q.angular, 1, q.seed + 7919ULL * k, q.qmc_points), a, b);
            ratios[k] = b / a;
            sr += a / reps;
            sR += b / reps;
        }
        vr = sr;
        vR = sR;
        double mean = vR / vr, var = 0.0;
        for (double x : ratios) var += (x - mean) * (x - mean);
        err = std::sqrt(var / (reps * (reps - 1.0))) / mean;
    }

    double kappa = p.c * p.K;
    double T = sector.cut_infimum();
    double upper = std::min(R * T / p.a, kappa > 0.0 ? M_PI / std::sqrt(kappa) : kInf);
    double bound = (p.b / p.a) * comparison_integral(kappa, 1.0 / p.c, upper) /
                   comparison_integral(kappa, 1.0 / p.c, r * T / p.b);
    double ratio = vR / vr;

    CheckReport rep;
    rep.name = "sclv_bishop_gromov";
    rep.params = report_params(p);
    rep.tolerance = tol;
    rep.add(R, (ratio - bound) / std::max(1.0, bound));
    rep.values["ratio"] = ratio;
    rep.values["bound"] = bound;
    rep.values["volume_r"] = vr;
    rep.values["volume_R"] = vR;
    rep.values["quadrature_error"] = err;
    rep.values["r"] = r;
    rep.values["R"] = R;
    rep.values["cut_infimum"] = T;
    rep.values["curvature_margin"] = hs.curvature_margin;
    rep.notes.push_back(sector.tabulated() ? "case B: tabulated cut function, bound uses its infimum"
                                           : "case A: constant cut function");
    if (q.tol > 0.0 && err > q.tol) {
        rep.notes.push_back("quadrature error " + num(err) + " above budget " + num(q.tol));
        rep.max_violation = kNaN;
    }
    rep.finalize();
    return rep;
}

Vec differential(const TMField& f, const Vec& x) {
    int n = int(x.size());
    std::vector<D1> X(n), V(n, D1(0.0));
    Vec out(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) X[j] = D1(x[j], i == j ? 1.0 : 0.0);
        out[i] = f(X.data(), V.data()).b;
    }
    return out;
}

Vec temporal_gradient(const ChartedSpace& s, const TMField& f, const Vec& x) {
    LegendreInverseOptions lo;
    lo.check_polar = false;
    return legendre_inverse(s, x, -differential(f, x), lo);
}

CheckReport hessian_symmetry_check(const ChartedSpace& s, const TMField& f, const Vec& x, const HessianOptions& opt) {
    require_lorentzian(s, "hessian_symmetry_check");
    int n = s.dim;
    Vec df = differential(f, x);
    auto pc = polar_cone_test(s, x, -df);
    if (!pc.member)
        throw HypothesisError("hessian_symmetry_check: f is not temporal at " + vec_str(x) +
                              " (-df is not in the polar cone, max value " + num(pc.max_value) + ")");
    VectorField grad = [&](const Vec& y) { return temporal_gradient(s, f, y); };
    Vec G = grad(x);
    Mat g = metric(s, x, G);
    Mat H(n, n);
    for (int i = 0; i < n; ++i) H.col(i) = covariant_derivative(s, grad, x, Vec::Unit(n, i), G);
    Mat S = g * H;  // S(j, i) = g_G(e_j, H e_i)
    double hs = std::max(1.0, S.cwiseAbs().maxCoeff());
    double sym = (S - S.transpose()).cwiseAbs().maxCoeff() / hs;
    double gid = (g * G + df).cwiseAbs().maxCoeff() / std::max(1.0, df.norm());

    CheckReport rep;
    rep.name = "hessian_symmetry";
    rep.tolerance = 1.0;
    rep.add(0.0, sym / opt.symmetry_tol);
    rep.add(1.0, gid / opt.gradient_tol);
    rep.values["symmetry_residual"] = sym;
    rep.values["gradient_identity_residual"] = gid;
    rep.values["symmetry_tol"] = opt.symmetry_tol;
    rep.values["gradient_tol"] = opt.gradient_tol;
    rep.values["hessian_max_abs"] = H.cwiseAbs().maxCoeff();
    rep.notes.push_back("residuals are reported as multiples of their tolerances");
    rep.finalize();
    return rep;
}

}  // namespace finslercomp

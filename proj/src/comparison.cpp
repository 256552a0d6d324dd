#include "finslercomp/comparison.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

#include "finslercomp/numerics.hpp"
#include "finslercomp/util.hpp"

namespace finslercomp {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double sqr(double x) { return x * x; }

// Least-squares slope and intercept of y against x.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    double n = double(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double den = n * sxx - sx * sx;
    if (den == 0.0) return {kNaN, kNaN};
    double slope = (n * sxy - sx * sy) / den;
    return {slope, (sy - slope * sx) / n};
}

double first_or(const std::optional<double>& o, double fallback) { return o ? *o : fallback; }

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

SValue comparison_s(double kappa, double t) {
    if (kappa > 0.0) {
        double r = std::sqrt(kappa);
        double tmax = M_PI / r;
        if (t < -1e-12 || t > tmax * (1.0 + 1e-12))
            throw DomainError("comparison_s: t = " + num(t) + " outside [0, pi/sqrt(kappa)] = [0, " + num(tmax) + "]");
        return {std::sin(r * t) / r, std::cos(r * t)};
    }
    if (kappa == 0.0) return {t, 1.0};
    double r = std::sqrt(-kappa);
    return {std::sinh(r * t) / r, std::cosh(r * t)};
}

double comparison_integral(double kappa, double p, double T) {
    if (!(T > 0.0)) return 0.0;
    if (kappa > 0.0) T = std::min(T, M_PI / std::sqrt(kappa));
    if (kappa == 0.0) return std::pow(T, p + 1.0) / (p + 1.0);
    return integrate([&](double t) { return std::pow(std::max(0.0, comparison_s(kappa, t).s), p); }, 0.0, T, 1e-12);
}

BishopProfile bishop_profile(const ChartedSpace& s, const Ray& ray, double horizon, const ComparisonParams& p,
                             const TransverseOptions& opt) {
    BishopProfile bp;
    bp.params = p;
    bp.horizon = horizon;
    bp.td = transverse_data(s, ray.x0, ray.v0, horizon, opt);
    bp.weight = weight_along(s, bp.td.path);
    reparametrize(bp.weight, p.eps, p.m);
    bp.conjugate_t = bp.td.singular_t;

    const auto& td = bp.td;
    const auto& w = bp.weight;
    const double c = p.c, r = 2.0 * (p.eps - 1.0) / p.m;
    std::size_t K = td.size();
    std::size_t end = K;
    if (bp.conjugate_t) {
        end = 0;
        while (end < K && td.path.t[end] < *bp.conjugate_t) ++end;
        bp.truncated = true;
    }
    if (!td.path.completed) bp.truncated = true;

    bp.h.resize(end);
    for (std::size_t k = 0; k < end; ++k)
        bp.h[k] = k == 0 ? 0.0 : std::exp(-c * w.psi[k]) * std::pow(std::abs(td.Y[k].determinant()), c);
    GridDerivatives hd = uniform_derivatives(bp.h, td.dt);

    bp.tau.resize(end);
    bp.h1 = bp.h;
    bp.dh1.assign(end, kNaN);
    bp.ddh1.assign(end, kNaN);
    bp.ddh1_riccati.assign(end, kNaN);
    bp.ricci_N.assign(end, kNaN);
    std::vector<double> dh_riccati(end, kNaN);
    for (std::size_t k = 0; k < end; ++k) {
        bp.tau[k] = w.phi[k];
        double dphi = std::exp(r * w.psi[k]);
        double ddphi = dphi * r * w.dpsi[k];
        double ricN = weighted_ricci_from(td.ricci[k], w.dpsi[k], w.ddpsi[k], p.N, p.n);
        bp.ricci_N[k] = std::exp(-2.0 * r * w.psi[k]) * ricN;
        if (k == 0) continue;
        bp.dh1[k] = hd.d1[k] / dphi;
        bp.ddh1[k] = (hd.d2[k] - hd.d1[k] * ddphi / dphi) / (dphi * dphi);
        // independent route: (log h)' = c (tr B - psi'), (log h)'' = -c psi'' - c (Ric + tr B^2)
        const Mat& B = td.B[k];
        double lh1 = c * (B.trace() - w.dpsi[k]);
        double lh2 = -c * w.ddpsi[k] - c * (td.Rm[k].trace() + (B * B).trace());
        double h = bp.h[k];
        double dh = h * lh1, ddh = h * (lh1 * lh1 + lh2);
        dh_riccati[k] = dh / dphi;
        bp.ddh1_riccati[k] = (ddh - dh * ddphi / dphi) / (dphi * dphi);
    }

    // behaviour near tau = 0: h1 ~ tau^{c m}
    if (end > 4) {
        double tau_end = bp.tau[end - 1];
        std::vector<double> lx, ly, X, Yv;
        for (std::size_t k = 1; k < end; ++k) {
            if (bp.tau[k] > 0.05 * tau_end && lx.size() >= 3) break;
            lx.push_back(std::log(bp.tau[k]));
            ly.push_back(std::log(bp.h1[k]));
        }
        bp.small_tau_slope = linear_fit(lx, ly).first;
        double cm = c * p.m;
        for (std::size_t k = 1; k <= 4 && k < end; ++k) {
            X.push_back(std::pow(bp.tau[k], cm));
            Yv.push_back(bp.tau[k] * dh_riccati[k]);
        }
        bp.tau_dh1_limit = linear_fit(X, Yv).second;
    }
    return bp;
}

CheckReport check_bishop(const BishopProfile& prof, const CheckOptions& opt) {
    CheckReport rep;
    rep.name = "bishop";
    rep.params = report_params(prof.params);
    rep.tolerance = opt.tol;
    const auto& P = prof.params;
    std::size_t end = prof.h1.size();
    if (end < 8) {
        rep.notes.push_back("profile too short to check (conjugate point or chart exit near the start)");
        rep.max_violation = kNaN;
        rep.finalize();
        return rep;
    }
    double tau_full = prof.weight.phi_at(prof.td.path.t.back());
    double tau_lo = opt.window * tau_full;
    double tau_hi = prof.tau[end - 1];
    if (prof.conjugate_t) tau_hi = prof.weight.phi_at(*prof.conjugate_t) - opt.window * tau_full;

    double kappa = P.c * P.K;
    double max_abs = 0.0, riccati_gap = 0.0, ratio_increase = 0.0, prev_ratio = kNaN;
    int neg_inf = 0;
    for (std::size_t k = 1; k < end; ++k) {
        double tau = prof.tau[k];
        if (tau < tau_lo || tau > tau_hi) continue;
        double h1 = prof.h1[k], ric = prof.ricci_N[k];
        double scale = std::max(1.0, std::abs(h1 * ric));
        double res;
        if (std::isinf(ric) && ric < 0) {
            res = -kInf;
            ++neg_inf;
        } else {
            res = (prof.ddh1[k] + P.c * h1 * ric) / scale;
            max_abs = std::max(max_abs, std::abs(res));
            riccati_gap = std::max(riccati_gap, std::abs(prof.ddh1[k] - prof.ddh1_riccati[k]) / scale);
        }
        rep.add(tau, res);
        // h1 / s_{cK} is non-increasing under the curvature hypothesis
        if (!(kappa > 0.0) || tau < M_PI / std::sqrt(kappa)) {
            double ratio = h1 / comparison_s(kappa, tau).s;
            if (std::isfinite(prev_ratio))
                ratio_increase = std::max(ratio_increase, (ratio - prev_ratio) / std::max(1.0, std::abs(prev_ratio)));
            prev_ratio = ratio;
        }
    }
    if (rep.grid.empty()) {
        rep.notes.push_back("empty check window");
        rep.max_violation = kNaN;
    }
    rep.values["max_abs_residual"] = max_abs;
    rep.values["riccati_crosscheck_gap"] = riccati_gap;
    rep.values["small_tau_slope"] = prof.small_tau_slope;
    rep.values["expected_slope"] = P.c * P.m;
    rep.values["tau_dh1_limit"] = prof.tau_dh1_limit;
    rep.values["ratio_increase_max"] = ratio_increase;
    rep.values["conjugate_t"] = first_or(prof.conjugate_t, kNaN);
    rep.values["tau_window_lo"] = tau_lo;
    rep.values["tau_window_hi"] = tau_hi;
    if (neg_inf) rep.notes.push_back("Ric_N = -inf at " + std::to_string(neg_inf) + " points (N = n with psi' != 0)");
    if (prof.truncated) rep.notes.push_back("profile truncated at t = " + num(prof.td.path.t[end - 1]));
    rep.finalize();
    return rep;
}

HypothesisSummary validate_hypotheses(const ChartedSpace& s, const ComparisonParams& p,
                                      const std::vector<std::pair<Vec, Vec>>& samples, bool need_curvature,
                                      bool need_weight_bounds, double rel_tol) {
    HypothesisSummary hs;
    hs.samples = int(samples.size());
    hs.curvature_margin = kInf;
    hs.weight_min = kInf;
    hs.weight_max = -kInf;
    std::vector<double> margin(samples.size()), wf(samples.size());
    parallel_for(int(samples.size()), [&](int i) {
        const auto& [x, v] = samples[i];
        double psi = s.psi(x, v);
        wf[i] = std::exp(-2.0 * (p.eps - 1.0) * psi / p.m);
        if (!need_curvature) return;
        double F = finsler_norm(s, x, v);
        double ric = weighted_ricci(s, x, v, p.N);
        margin[i] = ric / (F * F * std::exp(4.0 * (p.eps - 1.0) * psi / p.m)) - p.K;
    });
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (need_curvature) hs.curvature_margin = std::min(hs.curvature_margin, margin[i]);
        hs.weight_min = std::min(hs.weight_min, wf[i]);
        hs.weight_max = std::max(hs.weight_max, wf[i]);
    }
    if (need_curvature && !(hs.curvature_margin >= -rel_tol * std::max(1.0, std::abs(p.K))))
        throw HypothesisError("curvature hypothesis rejected: sampled infimum of Ric_N / (F^2 e^{4(eps-1)psi/m}) is " +
                              num(hs.curvature_margin + p.K) + " < K = " + num(p.K));
    if (need_weight_bounds) {
        if (hs.weight_min < p.a * (1.0 - rel_tol) || hs.weight_max > p.b * (1.0 + rel_tol))
            throw HypothesisError("weight bound hypothesis rejected: sampled exp(-2(eps-1)psi/m) ranges over [" +
                                  num(hs.weight_min) + ", " + num(hs.weight_max) + "], declared [" + num(p.a) + ", " +
                                  num(p.b) + "]");
    }
    return hs;
}

namespace {

// Path nodes as hypothesis samples; nodes that lost admissibility (the tail of a
// geodesic running into a blow-up) are dropped.
std::vector<std::pair<Vec, Vec>> samples_from(const ChartedSpace& s, const std::vector<const GeodesicPath*>& paths,
                                              int stride) {
    std::vector<std::pair<Vec, Vec>> out;
    for (const auto* p : paths)
        for (std::size_t k = 0; k < p->size(); k += std::size_t(stride))
            if (is_admissible(s, p->x[k], p->v[k])) out.emplace_back(p->x[k], p->v[k]);
    return out;
}

}  // namespace

std::vector<std::pair<Vec, Vec>> hypothesis_samples(const ChartedSpace& s, const std::vector<Ray>& rays,
                                                    double horizon, int stride) {
    std::vector<GeodesicPath> paths(rays.size());
    const int intervals = 64;
    GeodesicOptions go;
    for (int k = 0; k <= intervals; ++k) go.grid.push_back(horizon * k / intervals);
    go.record_only_grid = true;
    parallel_for(int(rays.size()), [&](int i) {
        Vec v = unit_speed(s, rays[i].x0, rays[i].v0);
        paths[i] = integrate_geodesic(s, rays[i].x0, v, horizon, 1e-9, go);
    });
    std::vector<const GeodesicPath*> ptrs;
    for (const auto& p : paths) ptrs.push_back(&p);
    return samples_from(s, ptrs, std::max(1, stride * intervals / 256));
}

CheckReport check_bonnet_myers(const ChartedSpace& s, const ComparisonParams& p, const std::vector<Ray>& rays,
                               double horizon, const CheckOptions& opt) {
    if (!(p.K > 0.0)) throw HypothesisError("bonnet_myers: requires K > 0; got K = " + num(p.K));
    double kappa = p.c * p.K;
    double bound_def = M_PI / std::sqrt(kappa);
    double bound = p.b * bound_def;

    std::vector<TransverseData> tds(rays.size());
    std::vector<WeightAlongGeodesic> ws(rays.size());
    parallel_for(int(rays.size()), [&](int i) {
        tds[i] = transverse_data(s, rays[i].x0, rays[i].v0, horizon, opt.transverse);
        ws[i] = weight_along(s, tds[i].path);
        reparametrize(ws[i], p.eps, p.m);
    });
    std::vector<const GeodesicPath*> ptrs;
    for (const auto& td : tds) ptrs.push_back(&td.path);
    ComparisonParams upper_only = p;
    upper_only.a = 0.0;
    auto hs = validate_hypotheses(s, upper_only, samples_from(s, ptrs, 8), true, true);

    CheckReport rep;
    rep.name = "bonnet_myers";
    rep.params = report_params(p);
    rep.tolerance = opt.tol;
    rep.values["bound"] = bound;
    rep.values["deformed_bound"] = bound_def;
    rep.values["curvature_margin"] = hs.curvature_margin;
    for (std::size_t i = 0; i < rays.size(); ++i) {
        const auto& td = tds[i];
        std::string tag = "[" + std::to_string(i) + "]";
        double r1, r2;
        if (td.singular_t) {
            double t0 = *td.singular_t;
            r1 = t0 - bound;
            r2 = ws[i].phi_at(t0) - bound_def;
            rep.values["t0" + tag] = t0;
            rep.values["phi_t0" + tag] = ws[i].phi_at(t0);
        } else {
            double T = td.path.t.back();
            r1 = T - bound;
            r2 = ws[i].phi_at(T) - bound_def;
            rep.values["t0" + tag] = kNaN;
            rep.values["horizon_reached" + tag] = T;
            rep.values["phi_horizon" + tag] = ws[i].phi_at(T);
            std::string why = td.path.completed ? "scenario horizon" : td.path.stop_reason;
            if (r1 > opt.tol)
                rep.notes.push_back("ray " + std::to_string(i) + ": no conjugate point up to t = " + num(T) +
                                    " although the bound is " + num(bound));
            else
                rep.notes.push_back("ray " + std::to_string(i) + ": no conjugate point before t = " + num(T) + " (" +
                                    why + "); the bound lies beyond the reachable range, only the deformed length "
                                    "is constrained");
        }
        rep.add(double(i), std::max(r1, r2));
    }
    rep.finalize();
    return rep;
}

std::vector<double> radial_laplacian(const TransverseData& td, const WeightAlongGeodesic& w) {
    std::vector<double> out(td.size(), kNaN);
    double tc = first_or(td.singular_t, kInf);
    for (std::size_t k = 1; k < td.size(); ++k)
        if (td.path.t[k] < tc) out[k] = td.trace_B[k] - w.dpsi[k];
    return out;
}

double radial_laplacian(const ChartedSpace& s, const Ray& ray, double t, const TransverseOptions& opt) {
    TransverseData td = transverse_data(s, ray.x0, ray.v0, t, opt);
    if (!td.path.completed) throw DomainError("radial_laplacian: geodesic stopped at t = " + num(td.path.t_reached) +
                                              " (" + td.path.stop_reason + ")");
    if (td.singular_t && *td.singular_t <= t)
        throw DomainError("radial_laplacian: t = " + num(t) + " lies beyond the conjugate point " +
                          num(*td.singular_t));
    WeightAlongGeodesic w = weight_along(s, td.path);
    return radial_laplacian(td, w).back();
}

CheckReport check_laplacian_comparison(const ChartedSpace& s, const ComparisonParams& p,
                                       const std::vector<Ray>& rays, double horizon, const CheckOptions& opt) {
    std::vector<TransverseData> tds(rays.size());
    std::vector<WeightAlongGeodesic> ws(rays.size());
    parallel_for(int(rays.size()), [&](int i) {
        tds[i] = transverse_data(s, rays[i].x0, rays[i].v0, horizon, opt.transverse);
        ws[i] = weight_along(s, tds[i].path);
        reparametrize(ws[i], p.eps, p.m);
    });
    std::vector<const GeodesicPath*> ptrs;
    for (const auto& td : tds) ptrs.push_back(&td.path);
    auto hs = validate_hypotheses(s, p, samples_from(s, ptrs, 8), true, true);

    CheckReport rep;
    rep.name = "laplacian_comparison";
    rep.params = report_params(p);
    rep.tolerance = opt.tol;
    double kappa = p.c * p.K;
    double tmax_model = kappa > 0.0 ? M_PI / std::sqrt(kappa) : kInf;
    double min_slack = kInf, min_slack_deformed = kInf, max_abs = 0.0;
    int skipped = 0, branch_window = 0;
    for (std::size_t i = 0; i < rays.size(); ++i) {
        const auto& td = tds[i];
        const auto& w = ws[i];
        auto lap = radial_laplacian(td, w);
        double tc = first_or(td.singular_t, kInf);
        double t_lo = opt.window * horizon, t_hi = tc - opt.window * horizon;
        for (std::size_t k = 1; k < td.size(); ++k) {
            double t = td.path.t[k];
            if (t < t_lo || t > t_hi || !std::isfinite(lap[k])) continue;
            double u = t / p.b;
            double res = -kInf;
            if (u < tmax_model * (1.0 - 1e-9)) {
                SValue sv = comparison_s(kappa, u);
                auto bound_with = [&](double rho) { return sv.ds / (p.c * rho * sv.s); };
                double bound = bound_with(sv.ds >= 0.0 ? p.a : p.b);
                // both branches near the sign change of s'
                if (kappa > 0.0 && std::abs(u - 0.5 * tmax_model) <= 2.0 * td.dt / p.b) {
                    bound = std::min(bound_with(p.a), bound_with(p.b));
                    ++branch_window;
                }
                double r1 = (lap[k] - bound) / std::max(1.0, std::abs(bound));
                res = r1;
                min_slack = std::min(min_slack, bound - lap[k]);
                max_abs = std::max(max_abs, std::abs(r1));
            } else {
                ++skipped;
            }
            double ph = w.phi[k];
            if (ph < tmax_model * (1.0 - 1e-9)) {
                SValue sp = comparison_s(kappa, ph);
                double ib = std::exp(2.0 * (p.eps - 1.0) * w.psi[k] / p.m) * sp.ds / (p.c * sp.s);
                double r2 = (lap[k] - ib) / std::max(1.0, std::abs(ib));
                res = std::max(res, r2);
                min_slack_deformed = std::min(min_slack_deformed, ib - lap[k]);
            }
            rep.add(t, res);
        }
    }
    if (rep.grid.empty()) {
        rep.notes.push_back("empty check window");
        rep.max_violation = kNaN;
    }
    rep.values["min_slack"] = min_slack;
    rep.values["min_slack_deformed"] = min_slack_deformed;
    rep.values["max_abs_relative_gap"] = max_abs;
    rep.values["curvature_margin"] = hs.curvature_margin;
    rep.values["weight_min"] = hs.weight_min;
    rep.values["weight_max"] = hs.weight_max;
    if (skipped) rep.notes.push_back(std::to_string(skipped) + " points beyond the model range pi/sqrt(cK) skipped");
    if (branch_window) rep.notes.push_back("both rho branches evaluated at " + std::to_string(branch_window) +
                                           " points near the zero of s'");
    rep.finalize();
    return rep;
}

double hermite_partial_integral(double h, double f0, double f1, double d0, double d1, double u) {
    double u2 = u * u, u3 = u2 * u, u4 = u3 * u;
    double i00 = u4 / 2 - u3 + u;
    double i10 = u4 / 4 - 2 * u3 / 3 + u2 / 2;
    double i01 = -u4 / 2 + u3;
    double i11 = u4 / 4 - u3 / 3;
    return h * (i00 * f0 + i10 * h * d0 + i01 * f1 + i11 * h * d1);
}

IndicatrixRule indicatrix_rule(const ChartedSpace& s, const Vec& x, int angular, bool half_resolution) {
    int n = s.dim;
    if (n != 2 && n != 3) throw Error("indicatrix_rule: product rules cover dim 2 and 3");
    std::vector<Vec> us;
    std::vector<double> ws;
    if (n == 2) {
        int M = angular > 0 ? angular : 64;
        int step = half_resolution ? 2 : 1;
        for (int j = 0; j < M; j += step) {
            double th = 2.0 * M_PI * j / M;
            Vec u(2);
            u << std::cos(th), std::sin(th);
            us.push_back(u);
            ws.push_back(2.0 * M_PI * step / M);
        }
    } else {
        int Mz = angular > 0 ? angular : 8;
        int Mp = 2 * Mz;
        int step = half_resolution ? 2 : 1;
        auto [z, wz] = gauss_legendre(Mz, -1.0, 1.0);
        for (int i = 0; i < Mz; ++i)
            for (int j = 0; j < Mp; j += step) {
                double ph = 2.0 * M_PI * (j + 0.5) / Mp;
                double rr = std::sqrt(std::max(0.0, 1.0 - z[i] * z[i]));
                Vec u(3);
                u << rr * std::cos(ph), rr * std::sin(ph), z[i];
                us.push_back(u);
                ws.push_back(wz[i] * 2.0 * M_PI * step / Mp);
            }
    }
    IndicatrixRule rule;
    for (std::size_t k = 0; k < us.size(); ++k) {
        const Vec& u = us[k];
        Mat g = vertical_hessian(s, x, u);
        double F = std::sqrt(u.dot(g * u));
        Vec dF = g * u / F;
        // orthonormal tangent basis of the Euclidean sphere at u
        Eigen::HouseholderQR<Mat> qr(u);
        Mat Q = qr.householderQ() * Mat::Identity(n, n);
        Mat T = Q.rightCols(n - 1);
        Mat D = T / F - u * (dF.transpose() * T) / (F * F);
        double xi = std::sqrt(std::max(0.0, (D.transpose() * g * D).determinant()));
        rule.directions.push_back(u / F);
        rule.weights.push_back(ws[k] * xi);
    }
    return rule;
}

namespace {

// Indicatrix rule from quasi-random points (Halton, randomly shifted) for dim > 3.
IndicatrixRule indicatrix_rule_qmc(const ChartedSpace& s, const Vec& x, int count, std::uint64_t seed) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
    int n = s.dim;
    if (n > 10) throw Error("indicatrix_rule: quasi-random rule supports dim <= 10");
    Rng rng(seed);
    std::vector<double> shift(n);
    for (auto& v : shift) v = rng.uniform();
    double area = 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
    IndicatrixRule rule;
    for (int k = 1; k <= count; ++k) {
        Vec z(n);
        // Box-Muller on pairs of shifted Halton coordinates
        for (int i = 0; i < n; i += 2) {
            double u1 = std::fmod(halton(k, primes[2 * (i / 2)]) + shift[i], 1.0);
            double u2 = std::fmod(halton(k, primes[2 * (i / 2) + 1]) + shift[std::min(i + 1, n - 1)], 1.0);
            u1 = std::max(u1, 1e-300);
            double rad = std::sqrt(-2.0 * std::log(u1));
            z[i] = rad * std::cos(2.0 * M_PI * u2);
            if (i + 1 < n) z[i + 1] = rad * std::sin(2.0 * M_PI * u2);
        }
        Vec u = z.normalized();
        Mat g = vertical_hessian(s, x, u);
        double F = std::sqrt(u.dot(g * u));
        Vec dF = g * u / F;
        Eigen::HouseholderQR<Mat> qr(u);
        Mat Q = qr.householderQ() * Mat::Identity(n, n);
        Mat T = Q.rightCols(n - 1);
        Mat D = T / F - u * (dF.transpose() * T) / (F * F);
        double xi = std::sqrt(std::max(0.0, (D.transpose() * g * D).determinant()));
        rule.directions.push_back(u / F);
        rule.weights.push_back(area * xi / count);
    }
    return rule;
}

}  // namespace

std::vector<double> radial_masses(const ChartedSpace& s, const Vec& origin, const Vec& v,
                                  const std::vector<double>& radii, int intervals, bool* clipped) {
    if (radii.empty()) return {};
    TransverseOptions to;
    to.grid_intervals = intervals;
    to.tol = 1e-9;
    TransverseData td = transverse_data(s, origin, v, radii.back(), to);
    WeightAlongGeodesic w = weight_along(s, td.path);
    std::size_t K = td.size();
    int m = td.m;
    std::vector<double> f(K), df(K);
    for (std::size_t k = 0; k < K; ++k) {
        double e = std::exp(-w.psi[k]);
        if (k == 0) {
            f[k] = 0.0;
            df[k] = m == 1 ? e : 0.0;
        } else {
            f[k] = e * std::abs(td.Y[k].determinant());
            df[k] = f[k] * (td.trace_B[k] - w.dpsi[k]);
        }
    }
    double limit = td.path.t.back();
    if (td.singular_t) limit = std::min(limit, *td.singular_t);
    if (limit < radii.back() * (1.0 - 1e-12) && clipped) *clipped = true;
    std::vector<double> out;
    double acc = 0.0;
    std::size_t k = 0;
    for (double r : radii) {
        double stop = std::min(r, limit);
        while (k + 1 < K && td.path.t[k + 1] <= stop) {
            double h = td.path.t[k + 1] - td.path.t[k];
            acc += hermite_partial_integral(h, f[k], f[k + 1], df[k], df[k + 1], 1.0);
            ++k;
        }
        double partial = 0.0;
        if (k + 1 < K && stop > td.path.t[k]) {
            double h = td.path.t[k + 1] - td.path.t[k];
            // beyond a conjugate point |det Y| is not smooth; use the values up to the node only
            partial = hermite_partial_integral(h, f[k], f[k + 1], df[k], df[k + 1], (stop - td.path.t[k]) / h);
        }
        out.push_back(acc + partial);
    }
    return out;
}

VolumeResult ball_volumes(const ChartedSpace& s, const Vec& origin, const std::vector<double>& radii,
                          const QuadratureSpec& q) {
    if (s.signature != Signature::positive) throw Error("ball_volume: positive-definite spaces only");
    if (radii.empty()) throw Error("ball_volume: no radius requested");
    for (std::size_t i = 0; i < radii.size(); ++i)
        if (!(radii[i] > 0.0) || (i > 0 && radii[i] < radii[i - 1]))
            throw Error("ball_volume: radii must be positive and ascending");
    int n = s.dim;
    VolumeResult res;
    res.radii = radii;
    std::size_t R = radii.size();
    auto run_rule = [&](const IndicatrixRule& rule, std::vector<double>& totals, std::vector<double>* half,
                        int half_stride) {
        std::vector<std::vector<double>> per(rule.directions.size());
        std::vector<char> clip(rule.directions.size(), 0);
        parallel_for(int(rule.directions.size()), [&](int i) {
            bool c = false;
            per[i] = radial_masses(s, origin, rule.directions[i], radii, q.radial_intervals, &c);
            clip[i] = c;
        });
        totals.assign(R, 0.0);
        if (half) half->assign(R, 0.0);
        for (std::size_t i = 0; i < per.size(); ++i)
            for (std::size_t j = 0; j < R; ++j) {
                totals[j] += rule.weights[i] * per[i][j];
                if (half && i % half_stride == 0) (*half)[j] += half_stride * rule.weights[i] * per[i][j];
            }
    };
    if (n <= 3) {
        IndicatrixRule rule = indicatrix_rule(s, origin, q.angular);
        // the half-resolution rule reuses every other azimuthal node
        std::vector<double> full, half;
        run_rule(rule, full, &half, 2);
        res.volumes = full;
        res.error_estimate = std::abs(full.back() - half.back());
    } else {
        int reps = std::max(2, q.qmc_replicas);
        std::vector<std::vector<double>> vals(reps);
        for (int r = 0; r < reps; ++r) {
            IndicatrixRule rule = indicatrix_rule_qmc(s, origin, q.qmc_points, q.seed + 7919ULL * r);
            run_rule(rule, vals[r], nullptr, 1);
        }
        res.volumes.assign(R, 0.0);
        for (std::size_t j = 0; j < R; ++j) {
            for (int r = 0; r < reps; ++r) res.volumes[j] += vals[r][j] / reps;
        }
        double var = 0.0;
        for (int r = 0; r < reps; ++r) var += sqr(vals[r].back() - res.volumes.back());
        res.error_estimate = std::sqrt(var / (reps * (reps - 1.0)));
    }
    res.volume = res.volumes.back();
    if (q.tol > 0.0 && res.error_estimate > q.tol * std::max(1.0, res.volume))
        throw NumericalError("ball_volume: quadrature error estimate " + num(res.error_estimate) +
                             " exceeds the requested tolerance");
    return res;
}

double ball_volume(const ChartedSpace& s, const Vec& origin, double r, const QuadratureSpec& q) {
    return ball_volumes(s, origin, {r}, q).volume;
}

CheckReport check_bishop_gromov(const ChartedSpace& s, const ComparisonParams& p, const Vec& origin, double r,
                                double R, const QuadratureSpec& q, double tol) {
    if (!(r > 0.0 && r < R)) throw Error("bishop_gromov: requires 0 < r < R");
    double kappa = p.c * p.K;
    if (p.K > 0.0 && R > p.b * M_PI / std::sqrt(kappa) * (1.0 + 1e-12))
        throw HypothesisError("bishop_gromov: R = " + num(R) + " exceeds b pi / sqrt(cK) = " +
                              num(p.b * M_PI / std::sqrt(kappa)));
    // hypothesis samples from a handful of radial geodesics
    std::vector<Ray> rays;
    {
        int n = s.dim;
        for (int i = 0; i < n; ++i) {
            for (double sg : {1.0, -1.0}) {
                Vec v = Vec::Zero(n);
                v[i] = sg;
                rays.push_back({origin, v});
            }
        }
        Vec d = Vec::Ones(n);
        rays.push_back({origin, d});
    }
    auto hs = validate_hypotheses(s, p, hypothesis_samples(s, rays, R), true, true);

    VolumeResult vr = ball_volumes(s, origin, {r, R}, q);
    double ratio = vr.volumes[1] / vr.volumes[0];
    double upper = std::min(R / p.a, kappa > 0.0 ? M_PI / std::sqrt(kappa) : kInf);
    double bound = (p.b / p.a) * comparison_integral(kappa, 1.0 / p.c, upper) /
                   comparison_integral(kappa, 1.0 / p.c, r / p.b);
    CheckReport rep;
    rep.name = "bishop_gromov";
    rep.params = report_params(p);
    rep.tolerance = tol;
    rep.add(R, (ratio - bound) / std::max(1.0, bound));
    rep.values["ratio"] = ratio;
    rep.values["bound"] = bound;
    rep.values["volume_r"] = vr.volumes[0];
    rep.values["volume_R"] = vr.volumes[1];
    rep.values["quadrature_error"] = vr.error_estimate;
    rep.values["r"] = r;
    rep.values["R"] = R;
    rep.values["curvature_margin"] = hs.curvature_margin;
    rep.finalize();
    return rep;
}

}  // namespace finslercomp

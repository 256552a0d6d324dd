#include "finslercomp/ode.hpp"

#include <algorithm>
#include <cmath>

namespace finslercomp {

namespace {

// Dormand-Prince coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double err_norm(const Vec& err, const Vec& y0, const Vec& y1, double rtol, double atol) {
    double acc = 0.0;
    for (int i = 0; i < err.size(); ++i) {
        double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        double r = err[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / std::max<long>(1, err.size()));
}

}  // namespace

Vec hermite_value(double t0, double t1, const Vec& y0, const Vec& y1, const Vec& f0, const Vec& f1, double t) {
    double h = t1 - t0;
    if (h == 0.0) return y0;
    double s = (t - t0) / h;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    double h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s);
    double h11 = s * s * (s - 1);
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1;
}

Vec hermite_deriv(double t0, double t1, const Vec& y0, const Vec& y1, const Vec& f0, const Vec& f1, double t) {
    double h = t1 - t0;
    if (h == 0.0) return f0;
    double s = (t - t0) / h;
    double d00 = 6 * s * s - 6 * s;
    double d10 = 3 * s * s - 4 * s + 1;
    double d01 = -6 * s * s + 6 * s;
    double d11 = 3 * s * s - 2 * s;
    return (d00 * y0 + d01 * y1) / h + d10 * f0 + d11 * f1;
}

namespace {
std::size_t locate(const std::vector<double>& t, double tq) {
    if (t.size() < 2) return 0;
    auto it = std::upper_bound(t.begin(), t.end(), tq);
    std::size_t i = it == t.begin() ? 0 : std::size_t(it - t.begin()) - 1;
    return std::min(i, t.size() - 2);
}
}  // namespace

Vec OdeSolution::eval(double tq) const {
    if (t.empty()) throw Error("OdeSolution::eval on empty solution");
    if (t.size() == 1) return y[0];
    std::size_t i = locate(t, tq);
    return hermite_value(t[i], t[i + 1], y[i], y[i + 1], f[i], f[i + 1], tq);
}

Vec OdeSolution::deriv(double tq) const {
    if (t.empty()) throw Error("OdeSolution::deriv on empty solution");
    if (t.size() == 1) return f[0];
    std::size_t i = locate(t, tq);
    return hermite_deriv(t[i], t[i + 1], y[i], y[i + 1], f[i], f[i + 1], tq);
}

OdeSolution integrate_dp54(const OdeRhs& rhs, double t0, const Vec& y0, double t_end, const OdeOptions& opt) {
    OdeSolution sol;
    auto call = [&](double t, const Vec& y) {
        ++sol.rhs_evals;
        Vec k = rhs(t, y);
        if (!k.allFinite()) throw DomainError("non-finite right-hand side");
        return k;
    };
    Vec y = y0;
    Vec k1;
    try {
        k1 = call(t0, y);
    } catch (const DomainError& e) {
        sol.t_reached = t0;
        sol.stop_reason = std::string("initial state inadmissible: ") + e.what();
        return sol;
    }
    sol.t.push_back(t0);
    sol.y.push_back(y);
    sol.f.push_back(k1);
    double t = t0;
    double span = t_end - t0;
    if (span <= 0.0) {
        sol.completed = true;
        sol.t_reached = t0;
        return sol;
    }
    std::vector<double> stops;
    for (double s : opt.stops)
        if (s > t0 && s < t_end) stops.push_back(s);
    std::sort(stops.begin(), stops.end());
    stops.push_back(t_end);
    std::size_t next_stop = 0;

    double h = opt.h0;
    if (h <= 0.0) {
        double yn = y.norm(), fn = k1.norm();
        h = (fn > 0.0) ? 0.01 * std::max(1.0, yn) / fn : 0.01 * span;
        h = std::min({h, 0.1 * span, opt.hmax});
        h = std::max(h, 1e-8 * span);
    }
    const double hmin = 1e-13 * std::max(1.0, std::abs(t_end));
    int steps = 0;
    while (next_stop < stops.size()) {
        if (++steps > opt.max_steps) {
            sol.stop_reason = "step limit exceeded";
            break;
        }
        double target = stops[next_stop];
        double hstep = std::min({h, opt.hmax, target - t});
        bool hits = hstep >= target - t - 1e-15 * std::max(1.0, std::abs(target));
        if (hits) hstep = target - t;
        Vec k2, k3, k4, k5, k6, k7, ynew;
        double en;
        try {
            k2 = call(t + c2 * hstep, y + hstep * (a21 * k1));
            k3 = call(t + c3 * hstep, y + hstep * (a31 * k1 + a32 * k2));
            k4 = call(t + c4 * hstep, y + hstep * (a41 * k1 + a42 * k2 + a43 * k3));
            k5 = call(t + c5 * hstep, y + hstep * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            k6 = call(t + hstep, y + hstep * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            ynew = y + hstep * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            k7 = call(t + hstep, ynew);
            Vec err = hstep * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            en = err_norm(err, y, ynew, opt.rtol, opt.atol);
        } catch (const DomainError&) {
            h = 0.25 * hstep;
            if (h < hmin) {
                sol.stop_reason = "chart exit";
                break;
            }
            continue;
        }
        if (!(en <= 1.0)) {
            double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
            h = hstep * fac;
            if (h < hmin) {
                sol.stop_reason = "step size underflow";
                break;
            }
            continue;
        }
        if (!(ynew.cwiseAbs().maxCoeff() <= opt.y_max)) {
            sol.stop_reason = "solution blow-up";
            break;
        }
        t = hits ? target : t + hstep;
        y = ynew;
        k1 = k7;
        if (hits) ++next_stop;
        if (!opt.record_only_stops || hits) {
            sol.t.push_back(t);
            sol.y.push_back(y);
            sol.f.push_back(k1);
        }
        double fac = en > 0.0 ? std::min(5.0, 0.9 * std::pow(en, -0.2)) : 5.0;
        // a step clipped by a stop says little about the admissible size
        if (!(hits && hstep < h)) h = hstep * fac;
    }
    sol.t_reached = t;
    sol.completed = next_stop >= stops.size();
    if (sol.completed) sol.stop_reason.clear();
    if (!sol.completed && opt.record_only_stops && sol.t.back() != t) {
        sol.t.push_back(t);
        sol.y.push_back(y);
        sol.f.push_back(k1);
    }
    return sol;
}

}  // namespace finslercomp

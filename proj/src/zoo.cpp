#include "finslercomp/zoo.hpp"

#include <cmath>

namespace finslercomp {

namespace {

template <class T>
T sq_sum(const T* a, int from, int to) {
    T s(0.0);
    for (int i = from; i < to; ++i) s += a[i] * a[i];
    return s;
}

TMField gaussian_weight(int dim, double lambda) {
    return TMField::from([dim, lambda](const auto* x, const auto*) { return 0.5 * lambda * sq_sum(x, 0, dim); });
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw Error("build_zoo: " + msg);
}

}  // namespace

const std::vector<ZooEntry>& zoo_list() {
    static const std::vector<ZooEntry> list = {
        {"euclidean", "positive", "flat R^n, L = |v|^2/2"},
        {"sphere", "positive", "unit sphere S^n in the stereographic chart, g = 4 delta / (1+|x|^2)^2"},
        {"poincare_ball", "positive", "hyperbolic space in the ball chart, g = 4 delta / (1-|x|^2)^2"},
        {"randers", "positive", "constant-drift Randers norm F = |v| + b v^0, |b| < 1"},
        {"gaussian_weighted_euclidean", "positive", "flat R^n with psi = lambda |x|^2 / 2"},
        {"minkowski", "lorentzian", "Minkowski space of dimension n+1"},
        {"weighted_minkowski", "lorentzian", "Minkowski space with psi = lambda |x|^2 / 2"},
        {"flrw", "lorentzian", "warped product 2L = -(v^0)^2 + f(x^0)^2 |v_space|^2, f in {cos, cosh, exp}"},
        {"beem", "lorentzian", "2-dim Lorentz-Finsler norm L = r^2 cos(k theta) / 2"},
    };
    return list;
}

double gaussian_density(const Vec& x, double lambda) { return std::exp(-0.5 * lambda * x.squaredNorm()); }

ChartedSpace build_zoo(const std::string& name, const ZooParams& p) {
    ChartedSpace s;
    s.name = name;
    if (name == "euclidean" || name == "gaussian_weighted_euclidean") {
        require(p.n >= 2, "n must be at least 2");
        int n = p.n;
        s.dim = n;
        s.lagrangian = TMField::from([n](const auto*, const auto* v) { return 0.5 * sq_sum(v, 0, n); });
        if (name == "gaussian_weighted_euclidean") {
            require(p.lambda > 0.0, "lambda must be positive");
            s.weight = gaussian_weight(n, p.lambda);
        }
    } else if (name == "sphere") {
        require(p.n >= 2, "n must be at least 2");
        int n = p.n;
        s.dim = n;
        s.lagrangian = TMField::from([n](const auto* x, const auto* v) {
            auto d = 1.0 + sq_sum(x, 0, n);
            return 2.0 * sq_sum(v, 0, n) / (d * d);
        });
    } else if (name == "poincare_ball") {
        require(p.n >= 2, "n must be at least 2");
        int n = p.n;
        s.dim = n;
        s.lagrangian = TMField::from([n](const auto* x, const auto* v) {
            auto d = 1.0 - sq_sum(x, 0, n);
            return 2.0 * sq_sum(v, 0, n) / (d * d);
        });
        s.chart_domain = [](const Vec& x) { return x.squaredNorm() < 1.0 - 1e-9; };
    } else if (name == "randers") {
        require(p.n >= 2, "n must be at least 2");
        require(std::abs(p.b) < 1.0, "Randers drift must satisfy |b| < 1 (positivity fails otherwise)");
        int n = p.n;
        double b = p.b;
        s.dim = n;
        s.lagrangian = TMField::from([n, b](const auto*, const auto* v) {
            using std::sqrt;
            auto F = sqrt(sq_sum(v, 0, n)) + b * v[0];
            return 0.5 * F * F;
        });
    } else if (name == "minkowski" || name == "weighted_minkowski") {
        require(p.n >= 1, "spatial dimension must be at least 1");
        int d = p.n + 1;
        s.dim = d;
        s.signature = Signature::lorentzian;
        s.lagrangian = TMField::from([d](const auto*, const auto* v) { return 0.5 * (sq_sum(v, 1, d) - v[0] * v[0]); });
        s.time_orientation = [d](const Vec&) { return Vec(Vec::Unit(d, 0)); };
        if (name == "weighted_minkowski") {
            require(p.lambda > 0.0, "lambda must be positive");
            s.weight = gaussian_weight(d, p.lambda);
        }
    } else if (name == "flrw") {
        require(p.n >= 1, "spatial dimension must be at least 1");
        int d = p.n + 1;
        s.dim = d;
        s.signature = Signature::lorentzian;
        s.time_orientation = [d](const Vec&) { return Vec(Vec::Unit(d, 0)); };
        if (p.warp == "cos") {
            s.lagrangian = TMField::from([d](const auto* x, const auto* v) {
                using std::cos;
                auto f = cos(x[0]);
                return 0.5 * (f * f * sq_sum(v, 1, d) - v[0] * v[0]);
            });
            s.chart_domain = [](const Vec& x) { return std::cos(x[0]) > 1e-6 && std::abs(x[0]) < M_PI / 2; };
        } else if (p.warp == "cosh") {
            s.lagrangian = TMField::from([d](const auto* x, const auto* v) {
                using std::cosh;
                auto f = cosh(x[0]);
                return 0.5 * (f * f * sq_sum(v, 1, d) - v[0] * v[0]);
            });
        } else if (p.warp == "exp") {
            s.lagrangian = TMField::from([d](const auto* x, const auto* v) {
                using std::exp;
                auto f = exp(x[0]);
                return 0.5 * (f * f * sq_sum(v, 1, d) - v[0] * v[0]);
            });
        } else {
            throw Error("build_zoo: unknown FLRW warp '" + p.warp + "' (expected cos, cosh or exp)");
        }
    } else if (name == "beem") {
        require(p.k >= 2, "Beem index k must be at least 2");
        int k = p.k;
        s.dim = 2;
        s.signature = Signature::lorentzian;
        s.lagrangian = TMField::from([k](const auto*, const auto* v) {
            using std::atan2;
            using std::cos;
            auto r2 = v[0] * v[0] + v[1] * v[1];
            return 0.5 * r2 * cos(double(k) * atan2(v[1], v[0]));
        });
        double th = M_PI / k;
        s.time_orientation = [th](const Vec&) {
            Vec X(2);
            X << std::cos(th), std::sin(th);
            return X;
        };
    } else {
        std::string names;
        for (const auto& e : zoo_list()) names += (names.empty() ? "" : ", ") + e.name;
        throw Error("build_zoo: unknown space '" + name + "'; available: " + names);
    }
    return s;
}

}  // namespace finslercomp

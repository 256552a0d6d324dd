#include <cmath>

#include <doctest.h>

#include "finslercomp/lagrangian.hpp"
#include "finslercomp/zoo.hpp"

using namespace finslercomp;

namespace {

Vec vec(std::initializer_list<double> l) {
    Vec v(Eigen::Index(l.size()));
    int i = 0;
    for (double d : l) v[i++] = d;
    return v;
}

// Second v-derivatives of L by central differences, independent of the dual engine.
Mat fd_hessian(const ChartedSpace& s, const Vec& x, const Vec& v, double h = 1e-4) {
    int n = s.dim;
    Mat H(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Vec pp = v, pm = v, mp = v, mm = v;
            pp[i] += h; pp[j] += h;
            pm[i] += h; pm[j] -= h;
            mp[i] -= h; mp[j] += h;
            mm[i] -= h; mm[j] -= h;
            H(i, j) = (s.L(x, pp) - s.L(x, pm) - s.L(x, mp) + s.L(x, mm)) / (4 * h * h);
        }
    return H;
}

}  // namespace

TEST_CASE("sphere metric matches the stereographic conformal factor") {
    auto s = build_zoo("sphere", {.n = 3});
    Vec x = vec({0.2, -0.4, 0.1}), v = vec({1.0, 0.5, -2.0});
    double f = 4.0 / std::pow(1.0 + x.squaredNorm(), 2);
    Mat g = fundamental_tensor(s, x, v).matrix;
    CHECK((g - f * Mat::Identity(3, 3)).norm() < 1e-13);
    CHECK(finsler_norm(s, x, v) == doctest::Approx(std::sqrt(f) * v.norm()));
}

TEST_CASE("derivatives: duals, Richardson and hand-computed partials agree") {
    auto s = build_zoo("sphere", {.n = 2});
    Vec x = vec({0.3, 0.2}), v = vec({0.7, -1.1});
    double d = 1.0 + x.squaredNorm();
    // L = 2|v|^2/d^2, d/dx0 d/dv0 L = -16 x0 v0 / d^3
    double exact = -16.0 * x[0] * v[0] / (d * d * d);
    std::vector<Partial> p{{Partial::x, 0}, {Partial::v, 0}};
    CHECK(derive(s, s.lagrangian, x, v, p, DiffMethod::dual).value == doctest::Approx(exact).epsilon(1e-13));
    CHECK(derive(s, s.lagrangian, x, v, p, DiffMethod::richardson).value == doctest::Approx(exact).epsilon(1e-7));
    CHECK_THROWS(derive(s, s.lagrangian, x, v, std::vector<Partial>(5, Partial{Partial::v, 0})));
}

TEST_CASE("Randers and Beem fundamental tensors against finite differences") {
    auto r = build_zoo("randers", {.n = 3, .b = 0.4});
    Vec x = vec({0.0, 0.0, 0.0});
    for (const auto& smp : sample_admissible(r, 20, 3)) {
        Mat g = vertical_hessian(r, smp.x, smp.v);
        CHECK((g - fd_hessian(r, smp.x, smp.v)).norm() < 1e-5 * std::max(1.0, g.norm()));
    }
    auto b = build_zoo("beem", {.k = 4});
    Vec v = vec({std::cos(0.8), std::sin(0.8)});
    CHECK((vertical_hessian(b, vec({0, 0}), v) - fd_hessian(b, vec({0, 0}), v)).norm() < 1e-5);
}

TEST_CASE("Cartan tensor vanishes for Riemannian metrics and is v-transverse for Randers") {
    auto s = build_zoo("poincare_ball", {.n = 2});
    CHECK(cartan_tensor(s, vec({0.1, 0.3}), vec({1.0, 2.0})).max_abs() < 1e-10);
    auto r = build_zoo("randers", {.n = 2, .b = 0.6});
    Vec v = vec({0.3, -0.8});
    Tensor3 C = cartan_tensor(r, vec({0, 0}), v);
    CHECK(C.max_abs() > 1e-3);
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) CHECK(std::abs(C(0, j, k) * v[0] + C(1, j, k) * v[1]) < 1e-10);
}

TEST_CASE("property: homogeneity on every built-in space") {
    for (const auto& e : zoo_list()) {
        ZooParams zp;
        zp.n = e.name == "beem" ? 1 : 2;
        auto s = build_zoo(e.name, zp);
        auto rep = validate_homogeneity(s, 40, 11);
        INFO(e.name, " max residual ", rep.max_violation);
        CHECK(rep.pass);
        for (const auto& smp : sample_admissible(s, 10, 5)) {
            Mat g = vertical_hessian(s, smp.x, smp.v);
            // g_v(v, v) = 2 L(v)
            CHECK(smp.v.dot(g * smp.v) == doctest::Approx(2.0 * s.L(smp.x, smp.v)).epsilon(1e-9));
            CHECK(negative_eigenvalues(g) == (s.signature == Signature::lorentzian ? 1 : 0));
        }
    }
}

TEST_CASE("Randers positivity is enforced") {
    CHECK_THROWS(build_zoo("randers", {.n = 2, .b = 1.0}));
    CHECK_THROWS(build_zoo("no_such_space"));
}

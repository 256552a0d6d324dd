#include <cmath>

#include <doctest.h>

#include "finslercomp/lorentz.hpp"
#include "finslercomp/util.hpp"
#include "finslercomp/zoo.hpp"

using namespace finslercomp;

namespace {

Vec vec(std::initializer_list<double> l) {
    Vec v(Eigen::Index(l.size()));
    int i = 0;
    for (double d : l) v[i++] = d;
    return v;
}

// dL/dv for L = r^2 cos(k theta) / 2 written in polar components.
Vec beem_gradient(int k, double r, double th) {
    double radial = r * std::cos(k * th), angular = -0.5 * k * r * std::sin(k * th);
    return vec({radial * std::cos(th) - angular * std::sin(th), radial * std::sin(th) + angular * std::cos(th)});
}

}  // namespace

TEST_CASE("causal classification in Minkowski space") {
    auto s = build_zoo("minkowski", {.n = 2});
    Vec x = Vec::Zero(3);
    auto t = classify(s, x, vec({1, 0.3, 0.2}));
    CHECK(t.kind == CausalKind::timelike);
    CHECK(t.future);
    auto p = classify(s, x, vec({-1, 0.3, 0.2}));
    CHECK(p.kind == CausalKind::timelike);
    CHECK_FALSE(p.future);
    CHECK(classify(s, x, vec({1, 1, 0})).kind == CausalKind::lightlike);
    CHECK(classify(s, x, vec({0.2, 1, 0})).kind == CausalKind::spacelike);
    CHECK(classify(s, x, vec({0, 0, 0})).kind == CausalKind::zero);
}

TEST_CASE("property: Beem Legendre map matches the polar closed form") {
    auto s = build_zoo("beem", {.k = 4});
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        double th = rng.uniform(0, 2 * M_PI), r = rng.uniform(0.2, 3);
        Vec w = legendre(s, vec({0, 0}), vec({r * std::cos(th), r * std::sin(th)}));
        CHECK((w - beem_gradient(4, r, th)).norm() < 1e-10 * std::max(1.0, r));
    }
}

TEST_CASE("Beem k = 4: directions at sin a = 8^(-1/4) and pi - a share one covector") {
    double a = std::asin(std::pow(8.0, -0.25));
    // the two polar gradients coincide exactly when cos 4a cos a + 2 sin 4a sin a = 0
    CHECK(std::abs(std::cos(4 * a) * std::cos(a) + 2 * std::sin(4 * a) * std::sin(a)) < 1e-12);
    auto s = build_zoo("beem", {.k = 4});
    Vec x = vec({0, 0});
    Vec v1 = vec({std::cos(a), std::sin(a)}), v2 = vec({-std::cos(a), std::sin(a)});
    CHECK(classify(s, x, v1).kind == CausalKind::timelike);
    CHECK(classify(s, x, v2).kind == CausalKind::timelike);
    CHECK((legendre(s, x, v1) - legendre(s, x, v2)).norm() < 1e-8);
}

TEST_CASE("Minkowski Legendre inverse and dual Lagrangian") {
    auto s = build_zoo("minkowski", {.n = 2});
    Vec x = Vec::Zero(3), v = vec({1.5, 0.4, -0.3});
    Vec w = legendre(s, x, v);
    CHECK((w - vec({-1.5, 0.4, -0.3})).norm() < 1e-12);
    CHECK((legendre_inverse(s, x, w) - v).norm() < 1e-10);
    CHECK(dual_lagrangian(s, x, w) == doctest::Approx(s.L(x, v)).epsilon(1e-10));
    // reverse Cauchy-Schwarz: -omega(u) >= sqrt(-2L*(omega)) sqrt(-2L(u)) for future timelike u
    Vec u = vec({1.0, -0.2, 0.5});
    CHECK(-w.dot(u) >= std::sqrt(-2 * s.L(x, v)) * std::sqrt(-2 * s.L(x, u)) - 1e-12);
}

TEST_CASE("polar cone membership") {
    auto s = build_zoo("minkowski", {.n = 1});
    Vec x = Vec::Zero(2);
    CHECK(polar_cone_test(s, x, vec({-1.0, 0.2})).member);
    CHECK_FALSE(polar_cone_test(s, x, vec({1.0, 0.2})).member);
    CHECK_FALSE(polar_cone_test(s, x, vec({-0.2, 1.0})).member);
    CHECK_THROWS(legendre_inverse(s, x, vec({1.0, 0.2})));
}

TEST_CASE("Lagrange tensor in Minkowski space: expansion n/t, no shear") {
    auto s = build_zoo("minkowski", {.n = 3});
    auto d = lagrange_tensor(s, Ray{Vec::Zero(4), vec({1, 0, 0, 0})}, 2.0, 1.0);
    REQUIRE(d.valid > 10);
    for (std::size_t k = 1; k < d.valid; k += 17) {
        double t = d.t()[k];
        CHECK(d.theta[k] * t == doctest::Approx(3.0).epsilon(1e-7));
        CHECK(d.sigma[k].norm() < 1e-7);
    }
    CHECK(d.lagrange_residual < 1e-10);
    CHECK(radial_dalembertian(s, Ray{Vec::Zero(4), vec({1, 0, 0, 0})}, 0.5) == doctest::Approx(6.0).epsilon(1e-7));
}

TEST_CASE("FLRW cos: expansion follows n cot t") {
    auto s = build_zoo("flrw", {.n = 2, .warp = "cos"});
    // comoving observer started at time -1; the Jacobi fields are sin(s) in a parallel frame
    auto d = lagrange_tensor(s, Ray{vec({-1.0, 0, 0}), vec({1, 0, 0})}, 1.5, 1.0);
    REQUIRE(d.valid > 10);
    std::size_t k = d.valid / 2;
    double t = d.t()[k];
    CHECK(d.theta[k] == doctest::Approx(2.0 / std::tan(t)).epsilon(1e-6));
}

TEST_CASE("temporal function: the Hessian of the time coordinate is symmetric") {
    auto s = build_zoo("minkowski", {.n = 1});
    auto f = TMField::from([](const auto* x, const auto*) { return x[0] + 0.0 * x[1]; });
    auto rep = hessian_symmetry_check(s, f, vec({0.2, 0.1}));
    CHECK(rep.pass);
    Vec df = differential(f, vec({0.2, 0.1}));
    CHECK((df - vec({1, 0})).norm() < 1e-12);
}

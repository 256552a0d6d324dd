#include <cmath>

#include <doctest.h>

#include "finslercomp/connection.hpp"
#include "finslercomp/zoo.hpp"

using namespace finslercomp;

namespace {

Vec vec(std::initializer_list<double> l) {
    Vec v(Eigen::Index(l.size()));
    int i = 0;
    for (double d : l) v[i++] = d;
    return v;
}

// Inverse stereographic projection onto the unit sphere in R^{n+1}.
Vec to_sphere(const Vec& x) {
    double d = 1.0 + x.squaredNorm();
    Vec p(x.size() + 1);
    p.head(x.size()) = 2.0 * x / d;
    p[x.size()] = (x.squaredNorm() - 1.0) / d;
    return p;
}

}  // namespace

TEST_CASE("flat geodesics are straight lines") {
    auto s = build_zoo("randers", {.n = 2, .b = 0.3});
    Vec x0 = vec({0.1, -0.2}), v0 = vec({0.6, 0.8});
    auto p = integrate_geodesic(s, x0, v0, 2.0);
    REQUIRE(p.completed);
    CHECK((p.x.back() - (x0 + 2.0 * v0)).norm() < 1e-9);
    CHECK(spray_at(s, x0, v0).norm() < 1e-12);
}

TEST_CASE("sphere geodesics are unit-speed great circles") {
    auto s = build_zoo("sphere", {.n = 2});
    Vec x0 = vec({0.2, 0.1}), v0 = unit_speed(s, x0, vec({0.3, 1.0}));
    auto p = integrate_geodesic(s, x0, v0, 2.5, 1e-11);
    REQUIRE(p.completed);
    Vec P0 = to_sphere(x0);
    // the chordal distance of a great circle arc of length t is 2 sin(t/2)
    for (double t : {0.5, 1.3, 2.5}) {
        double chord = (to_sphere(p.position(t)) - P0).norm();
        CHECK(chord == doctest::Approx(2.0 * std::sin(t / 2.0)).epsilon(1e-7));
    }
    CHECK(p.lagrangian_drift < 1e-9);
}

TEST_CASE("Chern connection is torsion free and equals Levi-Civita for Riemannian metrics") {
    auto s = build_zoo("poincare_ball", {.n = 2});
    Vec x = vec({0.3, -0.1}), v = vec({1.0, 0.4});
    auto cd = connection_at(s, x, v);
    // conformal metric e^{2u} delta with u = log 2 - log(1 - |x|^2): Gamma^i_jk = d_j u delta_ik + d_k u delta_ij - d_i u delta_jk
    Vec du = 2.0 * x / (1.0 - x.squaredNorm());
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                double lc = du[j] * (i == k) + du[k] * (i == j) - du[i] * (j == k);
                CHECK(cd.chern(i, j, k) == doctest::Approx(lc).epsilon(1e-8));
                CHECK(cd.chern(i, j, k) == doctest::Approx(cd.chern(i, k, j)).epsilon(1e-10));
            }
}

TEST_CASE("exponential map") {
    auto s = build_zoo("euclidean", {.n = 3});
    Vec x = vec({1, 2, 3});
    CHECK(exponential_map(s, x, Vec::Zero(3)) == x);
    CHECK((exponential_map(s, x, vec({0.5, 0, -1})) - vec({1.5, 2, 2})).norm() < 1e-9);
}

TEST_CASE("geodesics stop at the chart boundary") {
    auto s = build_zoo("poincare_ball", {.n = 2});
    auto p = integrate_geodesic(s, vec({0, 0}), vec({1, 0}), 50.0);
    CHECK_FALSE(p.completed);
    CHECK_FALSE(p.stop_reason.empty());
}

#include <cmath>

#include <doctest.h>

#include "finslercomp/curvature.hpp"
#include "finslercomp/zoo.hpp"

using namespace finslercomp;

namespace {

Vec vec(std::initializer_list<double> l) {
    Vec v(Eigen::Index(l.size()));
    int i = 0;
    for (double d : l) v[i++] = d;
    return v;
}

}  // namespace

TEST_CASE("property: constant flag curvature on space forms") {
    for (int n : {2, 3}) {
        auto sph = build_zoo("sphere", {.n = n});
        auto hyp = build_zoo("poincare_ball", {.n = n});
        for (const auto& smp : sample_admissible(sph, 8, 21, 0.5)) {
            Vec w = Vec::Unit(n, 0) + 0.3 * Vec::Unit(n, n - 1);
            double F2 = 2.0 * sph.L(smp.x, smp.v);
            CHECK(flag_curvature(sph, smp.x, smp.v, w) == doctest::Approx(1.0).epsilon(1e-6));
            CHECK(ricci_scalar(sph, smp.x, smp.v) == doctest::Approx((n - 1) * F2).epsilon(1e-6));
            CHECK(flag_curvature(hyp, smp.x, smp.v, w) == doctest::Approx(-1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("flat spaces have vanishing curvature") {
    auto r = build_zoo("randers", {.n = 3, .b = 0.5});
    CHECK(curvature_operator(r, vec({0.1, 0.2, 0.3}), vec({1, -1, 0.5})).norm() < 1e-9);
    auto m = build_zoo("minkowski", {.n = 2});
    CHECK(std::abs(ricci_scalar(m, vec({0, 0, 0}), vec({1, 0.2, 0.1}))) < 1e-9);
}

TEST_CASE("FLRW with cos warp has unit timelike flag curvature") {
    auto s = build_zoo("flrw", {.n = 2, .warp = "cos"});
    CHECK(flag_curvature(s, vec({0.3, 0.1, -0.2}), vec({1, 0, 0}), vec({0, 1, 0})) ==
          doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sphere conjugate point at pi, Euclidean none") {
    auto s = build_zoo("sphere", {.n = 2});
    auto td = transverse_data(s, vec({1, 0}), vec({0, 1}), 4.0);
    auto t0 = first_conjugate_point(td);
    REQUIRE(t0.has_value());
    CHECK(*t0 == doctest::Approx(M_PI).epsilon(1e-6));

    auto e = build_zoo("euclidean", {.n = 3});
    auto te = transverse_data(e, vec({0, 0, 0}), vec({0, 0.6, 0.8}), 20.0);
    CHECK_FALSE(first_conjugate_point(te).has_value());
    // flat Jacobi fields grow linearly: det A = t^(2m)
    std::size_t k = te.size() / 2;
    double t = te.path.t[k];
    CHECK(te.det_A[k] == doctest::Approx(std::pow(t, 4)).epsilon(1e-8));
}

TEST_CASE("matrix identities along a Randers geodesic") {
    auto s = build_zoo("randers", {.n = 3, .b = 0.5});
    auto td = transverse_data(s, vec({0, 0, 0}), vec({0.3, 1.0, -0.2}), 2.0);
    auto r = matrix_lemma_residuals(s, td);
    CHECK(r.nodes > 10);
    CHECK(r.commutator < 1e-6);
    CHECK(r.first < 1e-4);
    CHECK(r.second < 1e-4);
    CHECK(r.gauss < 1e-8);
}

TEST_CASE("orthonormal complement") {
    Mat g(3, 3);
    g << 2, 0.3, 0, 0.3, 1, 0.1, 0, 0.1, 3;
    Vec v = vec({1, 2, -1});
    Mat E = orthonormal_complement(g, v);
    REQUIRE(E.cols() == 2);
    CHECK((E.transpose() * g * E - Mat::Identity(2, 2)).norm() < 1e-12);
    CHECK((E.transpose() * g * v).norm() < 1e-12);
}

#include <cmath>

#include <doctest.h>

#include "finslercomp/comparison.hpp"
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

TEST_CASE("comparison functions") {
    for (double t : {0.1, 1.0, 2.5}) {
        CHECK(comparison_s(1.0, t).s == doctest::Approx(std::sin(t)));
        CHECK(comparison_s(4.0, t / 2).s == doctest::Approx(std::sin(t) / 2));
        CHECK(comparison_s(-1.0, t).s == doctest::Approx(std::sinh(t)));
        CHECK(comparison_s(0.0, t).s == doctest::Approx(t));
        CHECK(comparison_s(-1.0, t).ds == doctest::Approx(std::cosh(t)));
    }
    CHECK(comparison_integral(1.0, 2.0, M_PI) == doctest::Approx(M_PI / 2));
    CHECK(comparison_integral(0.0, 2.0, 3.0) == doctest::Approx(9.0));
}

TEST_CASE("Hermite partial integral is exact on cubics") {
    // f(t) = t^3 on [0, 2]: f0 = 0, f1 = 8, d0 = 0, d1 = 12
    CHECK(hermite_partial_integral(2.0, 0, 8, 0, 12, 0.5) == doctest::Approx(0.25));
    CHECK(hermite_partial_integral(2.0, 0, 8, 0, 12, 1.0) == doctest::Approx(4.0));
}

TEST_CASE("Euclidean ball volumes") {
    auto e2 = build_zoo("euclidean", {.n = 2});
    CHECK(ball_volume(e2, vec({0, 0}), 1.0) == doctest::Approx(M_PI).epsilon(1e-6));
    auto e3 = build_zoo("euclidean", {.n = 3});
    auto vr = ball_volumes(e3, vec({0, 0, 0}), {0.5, 1.0});
    REQUIRE(vr.volumes.size() == 2);
    CHECK(vr.volumes[1] == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-5));
    CHECK(vr.volumes[1] / vr.volumes[0] == doctest::Approx(8.0).epsilon(1e-6));
}

TEST_CASE("Gaussian-weighted disc mass") {
    // int_0^r exp(-lambda t^2 / 2) 2 pi t dt = 2 pi (1 - exp(-lambda r^2 / 2)) / lambda
    double lambda = 1.5, r = 0.9;
    auto g = build_zoo("gaussian_weighted_euclidean", {.n = 2, .lambda = lambda});
    CHECK(ball_volume(g, vec({0, 0}), r) ==
          doctest::Approx(2 * M_PI * (1 - std::exp(-lambda * r * r / 2)) / lambda).epsilon(1e-6));
}

TEST_CASE("radial Laplacian on flat and round model spaces") {
    auto e = build_zoo("euclidean", {.n = 3});
    CHECK(radial_laplacian(e, Ray{vec({0, 0, 0}), vec({1, 0, 0})}, 0.8) == doctest::Approx(2.0 / 0.8).epsilon(1e-7));
    auto s = build_zoo("sphere", {.n = 3});
    double t = 1.2;
    CHECK(radial_laplacian(s, Ray{vec({1, 0, 0}), vec({0, 1, 0})}, t) ==
          doctest::Approx(2.0 / std::tan(t)).epsilon(1e-6));
}

TEST_CASE("Bishop profile is an equality on the sphere with N = n, eps = 1") {
    auto s = build_zoo("sphere", {.n = 2});
    auto p = make_params(2, Signature::positive, ExtN::of(2.0), 1.0, 1.0);
    auto prof = bishop_profile(s, Ray{vec({1, 0}), vec({0, 1})}, 3.0, p);
    auto rep = check_bishop(prof);
    CHECK(rep.pass);
    CHECK(rep.max_violation < 1e-3);
    // h1 = sin t for m = 1, c = 1
    std::size_t k = prof.tau.size() / 2;
    CHECK(prof.h1[k] == doctest::Approx(std::sin(prof.tau[k])).epsilon(1e-6));
}

TEST_CASE("hypothesis gate rejects a curvature bound above the sampled infimum") {
    auto s = build_zoo("sphere", {.n = 2});
    auto p = make_params(2, Signature::positive, ExtN::of(2.0), 1.0, 2.0);
    auto smp = hypothesis_samples(s, {Ray{vec({1, 0}), vec({0, 1})}}, 2.0);
    CHECK_THROWS_AS(validate_hypotheses(s, p, smp, true, false), HypothesisError);
    auto ok = make_params(2, Signature::positive, ExtN::of(2.0), 1.0, 1.0);
    CHECK(validate_hypotheses(s, ok, smp, true, true).curvature_margin > -1e-6);
}

#include <cmath>
#include <limits>

#include <doctest.h>

#include "finslercomp/util.hpp"
#include "finslercomp/weighted.hpp"
#include "finslercomp/zoo.hpp"

using namespace finslercomp;

namespace {

const double inf = std::numeric_limits<double>::infinity();

Vec vec(std::initializer_list<double> l) {
    Vec v(Eigen::Index(l.size()));
    int i = 0;
    for (double d : l) v[i++] = d;
    return v;
}

GeodesicPath uniform_path(const ChartedSpace& s, const Vec& x0, const Vec& v0, double T, int intervals) {
    GeodesicOptions go;
    for (int i = 0; i <= intervals; ++i) go.grid.push_back(T * i / intervals);
    go.record_only_grid = true;
    return integrate_geodesic(s, x0, v0, T, 1e-11, go);
}

}  // namespace

TEST_CASE("epsilon-range constant, positive signature, dim 3") {
    auto c = [](double N, double eps) { return epsilon_range_constant(3, Signature::positive, ExtN::of(N), eps); };
    CHECK(c(inf, 0.5) == doctest::Approx(0.375));
    CHECK(c(1.0, 0.0) == doctest::Approx(0.5));
    CHECK(c(3.0, 0.9) == doctest::Approx(0.5));
    // N = 5: |eps| < sqrt(2), c = (1 - eps^2 / 2) / 2
    CHECK(c(5.0, 1.0) == doctest::Approx(0.25));
    // N = -1: |eps| < sqrt(1/2), c = (1 - 2 eps^2) / 2
    CHECK(c(-1.0, 0.5) == doctest::Approx(0.25));
    CHECK_THROWS_AS(c(2.0, 0.0), HypothesisError);
    CHECK_THROWS_AS(c(1.0, 0.1), HypothesisError);
    CHECK_THROWS_AS(c(inf, 1.0), HypothesisError);
    CHECK_THROWS_AS(c(5.0, 1.5), HypothesisError);
    CHECK_THROWS_AS(c(-inf, 0.0), HypothesisError);
}

TEST_CASE("epsilon-range constant, lorentzian dim 4 shifts the thresholds") {
    auto c = [](double N, double eps) { return epsilon_range_constant(4, Signature::lorentzian, ExtN::of(N), eps); };
    CHECK(c(0.0, 0.0) == doctest::Approx(1.0 / 3.0));
    CHECK(c(3.0, 0.2) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(c(1.0, 0.0), HypothesisError);
    // N = 6: |eps| < sqrt(2), c = (1 - eps^2 / 2) / 3
    CHECK(c(6.0, 0.5) == doctest::Approx((1 - 0.125) / 3.0));
}

TEST_CASE("property: weighted Ricci monotonicity in N") {
    Rng rng(99);
    int n = 3;
    for (int trial = 0; trial < 200; ++trial) {
        double ric = rng.uniform(-5, 5), dpsi = rng.uniform(-3, 3), ddpsi = rng.uniform(-3, 3);
        auto R = [&](double N) { return weighted_ricci_from(ric, dpsi, ddpsi, ExtN::of(N), n); };
        double above[] = {3.5, 4.0, 7.0, 100.0};
        for (int i = 0; i + 1 < 4; ++i) CHECK(R(above[i]) <= R(above[i + 1]));
        CHECK(R(100.0) <= R(inf));
        double below[] = {-100.0, -3.0, 0.0, 1.0};
        for (int i = 0; i + 1 < 4; ++i) CHECK(R(below[i]) <= R(below[i + 1]));
        CHECK(R(inf) <= R(-100.0));
        CHECK(R(inf) == doctest::Approx(ric + ddpsi));
    }
    CHECK(weighted_ricci_from(1.0, 0.5, 0.0, ExtN::of(3.0), 3) == -inf);
    CHECK(weighted_ricci_from(1.0, 0.0, 0.2, ExtN::of(3.0), 3) == doctest::Approx(1.2));
}

TEST_CASE("Gaussian weight derivatives along a straight line") {
    auto s = build_zoo("gaussian_weighted_euclidean", {.n = 2, .lambda = 1.5});
    Vec x = vec({0.3, -0.2}), v = vec({0.6, 0.8});
    auto fd = psi_flow_derivatives(s, x, v);
    CHECK(fd.psi == doctest::Approx(0.75 * x.squaredNorm()));
    CHECK(fd.dpsi == doctest::Approx(1.5 * x.dot(v)));
    CHECK(fd.ddpsi == doctest::Approx(1.5 * v.squaredNorm()));
}

TEST_CASE("reparametrization against independent quadrature") {
    auto s = build_zoo("gaussian_weighted_euclidean", {.n = 3, .lambda = 1.0});
    Vec x0 = vec({0.2, 0.1, -0.3}), v0 = vec({0.0, 0.6, 0.8});
    auto path = uniform_path(s, x0, v0, 1.5, 300);
    auto w = weight_along(s, path);

    auto r1 = reparametrize(w, 1.0, 2);
    CHECK(r1.completeness_integral == doctest::Approx(1.5).epsilon(1e-12));

    // eps = 0, m = 2: phi(T) = int_0^T exp(-psi) dt with psi = |x0 + t v0|^2 / 2; composite Simpson
    auto r0 = reparametrize(w, 0.0, 2);
    int K = 2000;
    double h = 1.5 / K, simpson = 0.0;
    for (int i = 0; i <= K; ++i) {
        double t = i * h;
        double f = std::exp(-0.5 * (x0 + t * v0).squaredNorm());
        simpson += f * (i == 0 || i == K ? 1 : (i % 2 ? 4 : 2));
    }
    simpson *= h / 3;
    CHECK(r0.completeness_integral == doctest::Approx(simpson).epsilon(1e-9));
    CHECK(w.phi_inverse(w.phi_at(0.7)) == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("weight factor range") {
    auto s = build_zoo("gaussian_weighted_euclidean", {.n = 2, .lambda = 2.0});
    auto path = uniform_path(s, vec({-0.5, 0}), vec({1, 0}), 1.0, 100);
    auto w = weight_along(s, path);
    auto [lo, hi] = weight_factor_range(w, 0.0, 1);
    // exp(2 psi) with psi = x^2 ranging over [0, 0.25]
    CHECK(lo == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(hi == doctest::Approx(std::exp(0.5)).epsilon(1e-9));
}

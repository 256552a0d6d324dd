#include <cmath>

#include <doctest.h>

#include "finslercomp/numerics.hpp"
#include "finslercomp/ode.hpp"
#include "finslercomp/util.hpp"

using namespace finslercomp;

TEST_CASE("fd weights reproduce the classic three-point stencils") {
    auto w = fd_weights(0.0, {-1.0, 0.0, 1.0}, 2);
    CHECK(w[1][0] == doctest::Approx(-0.5));
    CHECK(w[1][2] == doctest::Approx(0.5));
    CHECK(w[2][0] == doctest::Approx(1.0));
    CHECK(w[2][1] == doctest::Approx(-2.0));
    CHECK(w[2][2] == doctest::Approx(1.0));
}

TEST_CASE("uniform grid derivatives of sin") {
    double dt = 0.01;
    std::vector<double> f;
    for (int i = 0; i <= 300; ++i) f.push_back(std::sin(i * dt));
    auto d = uniform_derivatives(f, dt);
    for (int i = 0; i <= 300; i += 7) {
        CHECK(d.d1[i] == doctest::Approx(std::cos(i * dt)).epsilon(1e-9));
        CHECK(std::abs(d.d2[i] + std::sin(i * dt)) < 1e-7);
    }
}

TEST_CASE("quadrature") {
    CHECK(integrate([](double t) { return std::sin(t); }, 0.0, M_PI) == doctest::Approx(2.0).epsilon(1e-12));
    // Gauss-Legendre with k nodes is exact for degree 2k-1
    auto [x, w] = gauss_legendre(4, -1.0, 2.0);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 7);
    CHECK(s == doctest::Approx((std::pow(2.0, 8) - 1.0) / 8.0).epsilon(1e-13));
    CHECK(halton(1, 2) == 0.5);
    CHECK(halton(3, 3) == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("quintic Hermite is exact on quintics") {
    auto p = [](double t) { return t * t * t * t * t - 2 * t * t + 1; };
    auto dp = [](double t) { return 5 * t * t * t * t - 4 * t; };
    auto ddp = [](double t) { return 20 * t * t * t - 4; };
    double a = 0.3, b = 1.1;
    for (double t : {0.3, 0.5, 0.77, 1.1})
        CHECK(quintic_hermite(a, b, p(a), p(b), dp(a), dp(b), ddp(a), ddp(b), t) == doctest::Approx(p(t)));
}

TEST_CASE("Dormand-Prince on a harmonic oscillator") {
    OdeOptions o;
    o.rtol = 1e-11;
    o.atol = 1e-13;
    Vec y0(2);
    y0 << 0.0, 1.0;
    auto sol = integrate_dp54([](double, const Vec& y) { Vec f(2); f << y[1], -y[0]; return f; }, 0.0, y0, 10.0, o);
    REQUIRE(sol.completed);
    CHECK(sol.y.back()[0] == doctest::Approx(std::sin(10.0)).epsilon(1e-8));
    CHECK(sol.eval(3.3)[0] == doctest::Approx(std::sin(3.3)).epsilon(1e-5));
}

TEST_CASE("integration stops on blow-up") {
    OdeOptions o;
    o.y_max = 1e6;
    Vec y0(1);
    y0 << 1.0;
    // y' = y^2 blows up at t = 1
    auto sol = integrate_dp54([](double, const Vec& y) { return Vec(y.cwiseProduct(y)); }, 0.0, y0, 2.0, o);
    CHECK_FALSE(sol.completed);
    CHECK(sol.t_reached < 1.0);
    CHECK(sol.t_reached > 0.99);
}

TEST_CASE("rng is reproducible") {
    Rng a(42), b(42);
    for (int i = 0; i < 10; ++i) CHECK(a.uniform() == b.uniform());
    Rng c(7);
    for (int i = 0; i < 1000; ++i) {
        double u = c.uniform();
        CHECK((u >= 0.0 && u < 1.0));
    }
}

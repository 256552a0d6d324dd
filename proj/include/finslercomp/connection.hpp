// Connection hierarchy (formal Christoffel, spray, nonlinear, Chern),
// covariant derivative with reference vector, geodesics and exp.
#pragma once

#include <string>
#include <vector>

#include "finslercomp/lagrangian.hpp"
#include "finslercomp/ode.hpp"

namespace finslercomp {

struct ConnectionData {
    Tensor3 gamma;  // gamma(i,j,k) = gamma^i_jk
    Vec spray;      // G^i
    Mat nonlinear;  // N(i,j) = N^i_j
    Tensor3 chern;  // chern(i,j,k) = Gamma^i_jk
    Vec x, v;
};

ConnectionData connection_at(const ChartedSpace& s, const Vec& x, const Vec& v);

// Spray and nonlinear connection only (cheaper than connection_at).
Vec spray_at(const ChartedSpace& s, const Vec& x, const Vec& v);
Mat nonlinear_at(const ChartedSpace& s, const Vec& x, const Vec& v);

// D_v^ref X at x for a vector field X on the chart.
Vec covariant_derivative(const ChartedSpace& s, const VectorField& X, const Vec& x, const Vec& v, const Vec& ref);
// D_{velocity}^ref X along a curve, given X and dX/dt at the current point.
Vec covariant_derivative_along(const ChartedSpace& s, const Vec& x, const Vec& velocity, const Vec& X,
                               const Vec& dXdt, const Vec& ref);

struct GeodesicPath {
    std::vector<double> t;
    std::vector<Vec> x, v, a;  // position, velocity, acceleration (-2G)
    double lagrangian_drift = 0.0;
    bool completed = false;
    double t_end = 0.0;       // requested
    double t_reached = 0.0;   // actual (chart exit time when incomplete)
    std::string stop_reason;  // "chart exit", "step size underflow", ...

    Vec position(double tq) const;
    Vec velocity(double tq) const;
    std::size_t size() const { return t.size(); }
};

struct GeodesicOptions {
    std::vector<double> grid;  // force nodes at these times
    bool record_only_grid = false;
    double hmax = 0.0;  // 0: unlimited
};

GeodesicPath integrate_geodesic(const ChartedSpace& s, const Vec& x0, const Vec& v0, double t_end, double tol = 1e-9,
                                const GeodesicOptions& opt = {});

// exp_x(v); exp_x(0) = x without integrating.
Vec exponential_map(const ChartedSpace& s, const Vec& x, const Vec& v, double tol = 1e-9);

// Rescale v so that F(v) = 1.
Vec unit_speed(const ChartedSpace& s, const Vec& x, const Vec& v);

// CSV: t, x0.., v0.., L
std::string geodesic_csv(const ChartedSpace& s, const GeodesicPath& p);

}  // namespace finslercomp

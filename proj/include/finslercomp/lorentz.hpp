// Lorentz-Finsler tools: causal classification, Legendre transform and the
// dual Lagrangian, Lagrange tensor fields with weighted expansion and shear,
// and the spacetime comparison checks.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "finslercomp/comparison.hpp"

namespace finslercomp {

enum class CausalKind { timelike, lightlike, spacelike, zero };

struct CausalClass {
    CausalKind kind = CausalKind::zero;
    bool future = false;  // causal and in the cone component of the time orientation
};
std::string to_string(CausalKind k);

// |L(v)| <= band |v|^2 counts as lightlike.
CausalClass classify(const ChartedSpace& s, const Vec& x, const Vec& v, double band = 1e-9);

// dL/dv at v (any v != 0, no cone restriction).
Vec legendre(const ChartedSpace& s, const Vec& x, const Vec& v);

struct PolarConeTest {
    bool member = false;
    double max_value = 0.0;  // max of omega(u)/|omega| over unit future causal directions u
    int directions = 0;
};
// omega(u) < -margin |omega| for every sampled future causal unit direction,
// including points located on the light cone by bisection.
PolarConeTest polar_cone_test(const ChartedSpace& s, const Vec& x, const Vec& omega, double margin = 1e-8,
                              int resolution = 0);

struct LegendreInverseOptions {
    bool check_polar = true;
    double tol = 1e-13;  // relative residual
    int max_iter = 100;
};
// Future timelike v with dL/dv(v) = omega, by damped Newton.
Vec legendre_inverse(const ChartedSpace& s, const Vec& x, const Vec& omega, const LegendreInverseOptions& opt = {});

// L*(omega) = L(legendre_inverse(omega)).
double dual_lagrangian(const ChartedSpace& s, const Vec& x, const Vec& omega);
// Hessian of L* in omega, by central differences of legendre_inverse.
Mat dual_metric(const ChartedSpace& s, const Vec& x, const Vec& omega);

struct LagrangeTensorData {
    TransverseData td;
    WeightAlongGeodesic weight;  // phi filled for eps
    double eps = 1.0;
    int n = 0;                   // transverse dimension dim-1
    std::size_t valid = 0;       // grid nodes before the first conjugate point
    std::vector<Mat> J, Jp, B, sigma, B_eps, sigma_eps;  // index 0 holds NaN for B-derived fields
    std::vector<double> theta, theta_eps;
    double lagrange_residual = 0.0;  // max |J^T J' - J'^T J|
    double symmetry_residual = 0.0;  // max |B - B^T|
    std::optional<double> conjugate_t;
    bool truncated = false;

    const std::vector<double>& t() const { return td.path.t; }
};

// Lagrange tensor field with J(0) = 0, J'(0) = I along the unit-speed timelike
// geodesic from (x0, v0). Truncated at the first conjugate point.
LagrangeTensorData lagrange_tensor(const ChartedSpace& s, const Ray& ray, double horizon, double eps,
                                   const TransverseOptions& opt = {});
// Same data with the weighted quantities recomputed for another eps.
LagrangeTensorData with_eps(const LagrangeTensorData& d, double eps);

// (theta_eps o phi^-1)' <= -Ric_N - tr sigma_eps^2 - c theta_eps^2 on the window.
CheckReport check_raychaudhuri(const LagrangeTensorData& d, ExtN N, const CheckOptions& opt = {});
CheckReport check_raychaudhuri(const LagrangeTensorData& d, ExtN N, double eps, const CheckOptions& opt = {});

// Matrix residual of the weighted Riccati equation (entrywise, relative).
CheckReport check_weighted_riccati(const LagrangeTensorData& d, double tol = 1e-4, double window = 0.05);

// Bishop inequality on every ray plus conjugate-time bounds.
CheckReport check_spacetime_bonnet_myers(const ChartedSpace& s, const ComparisonParams& p,
                                         const std::vector<Ray>& rays, double horizon,
                                         const CheckOptions& opt = {});

// Weighted d'Alembertian of -u at time t: trace B - psi'.
double radial_dalembertian(const ChartedSpace& s, const Ray& ray, double t, const TransverseOptions& opt = {});

CheckReport check_lorentz_laplacian(const ChartedSpace& s, const ComparisonParams& p, const std::vector<Ray>& rays,
                                    double horizon, const CheckOptions& opt = {});

// Cone sector of the unit timelike indicatrix: directions axis + y with y in
// the g_axis-orthogonal slice and |y| <= tanh(rapidity).
struct SectorSpec {
    Vec axis;
    double rapidity = 0.5;
    std::vector<double> cut_table;  // empty: constant cut T; else T at |y|/tanh(rapidity) = j/(size-1)
    double T = 1.0;

    bool tabulated() const { return !cut_table.empty(); }
    double cut(double frac) const;  // frac in [0, 1]
    double cut_infimum() const;
};

CheckReport sclv_volume_check(const ChartedSpace& s, const ComparisonParams& p, const Vec& origin,
                              const SectorSpec& sector, double r, double R, const QuadratureSpec& q = {},
                              double tol = 1e-3);

struct HessianOptions {
    double symmetry_tol = 1e-5;
    double gradient_tol = 1e-7;
};
// f is a scalar on the chart given as a TMField ignoring its vector slot.
CheckReport hessian_symmetry_check(const ChartedSpace& s, const TMField& f, const Vec& x,
                                   const HessianOptions& opt = {});
Vec differential(const TMField& f, const Vec& x);
// grad(-f) = legendre_inverse(-df).
Vec temporal_gradient(const ChartedSpace& s, const TMField& f, const Vec& x);

}  // namespace finslercomp

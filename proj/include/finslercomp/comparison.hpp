// Comparison-theorem verifiers shared by both signatures: comparison
// functions, Bishop profiles, Bonnet-Myers, Laplacian comparison and volume
// ratios. Lorentzian wrappers live in lorentz.hpp.
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "finslercomp/curvature.hpp"
#include "finslercomp/weighted.hpp"

namespace finslercomp {

struct SValue {
    double s = 0.0, ds = 0.0;
};
// s'' + kappa s = 0, s(0) = 0, s'(0) = 1. For kappa > 0, t must lie in [0, pi/sqrt(kappa)].
SValue comparison_s(double kappa, double t);
// int_0^T s_kappa(t)^p dt
double comparison_integral(double kappa, double p, double T);

struct Ray {
    Vec x0, v0;
};

struct BishopProfile {
    TransverseData td;
    WeightAlongGeodesic weight;
    ComparisonParams params;
    std::vector<double> h;                     // on the t grid, truncated before the first conjugate point
    std::vector<double> tau, h1, dh1, ddh1;    // tau = phi(t)
    std::vector<double> ricci_N;               // Ric_N of the reparametrized velocity
    std::vector<double> ddh1_riccati;          // h1'' from the Riccati identity (cross-check)
    std::optional<double> conjugate_t;
    bool truncated = false;
    double horizon = 0.0;
    double small_tau_slope = 0.0;  // log-log slope of h1 near 0 (expected c*m)
    double tau_dh1_limit = 0.0;    // extrapolated lim tau h1'(tau)
};

BishopProfile bishop_profile(const ChartedSpace& s, const Ray& ray, double horizon, const ComparisonParams& p,
                             const TransverseOptions& opt = {});

struct CheckOptions {
    double tol = 1e-3;
    double window = 0.05;  // excluded fraction near tau = 0 and near a conjugate point
    TransverseOptions transverse;
};

// h1'' + c h1 Ric_N <= tol * max(1, |h1 Ric_N|) on the checked window.
CheckReport check_bishop(const BishopProfile& prof, const CheckOptions& opt = {});

// Hypothesis gates. Sampled points: (x, v) with v admissible.
// Curvature: Ric_N(v) >= K F(v)^2 exp(4(eps-1) psi / m); weight: a <= exp(-2(eps-1) psi / m) <= b.
struct HypothesisSummary {
    double curvature_margin = 0.0;  // min over samples of Ric_N / (F^2 e^{...}) - K
    double weight_min = 0.0, weight_max = 0.0;
    int samples = 0;
};
HypothesisSummary validate_hypotheses(const ChartedSpace& s, const ComparisonParams& p,
                                      const std::vector<std::pair<Vec, Vec>>& samples, bool need_curvature,
                                      bool need_weight_bounds, double rel_tol = 1e-6);
// Points along the rays (every `stride` grid node) plus the ray seeds.
std::vector<std::pair<Vec, Vec>> hypothesis_samples(const ChartedSpace& s, const std::vector<Ray>& rays,
                                                    double horizon, int stride = 8);

// Conjugate time t0 <= b pi / sqrt(cK) and phi(t0) <= pi / sqrt(cK) for every ray.
CheckReport check_bonnet_myers(const ChartedSpace& s, const ComparisonParams& p, const std::vector<Ray>& rays,
                               double horizon, const CheckOptions& opt = {});

// -psi' + trace B at time t along the ray (t must precede the first conjugate point).
double radial_laplacian(const ChartedSpace& s, const Ray& ray, double t, const TransverseOptions& opt = {});
// Same on every grid node of precomputed data (NaN at t = 0 and beyond a conjugate point).
std::vector<double> radial_laplacian(const TransverseData& td, const WeightAlongGeodesic& w);

// Both the (a, b, rho) bound and the deformed intermediate bound.
CheckReport check_laplacian_comparison(const ChartedSpace& s, const ComparisonParams& p,
                                       const std::vector<Ray>& rays, double horizon, const CheckOptions& opt = {});

struct QuadratureSpec {
    int angular = 0;         // points per angle (0: default for the dimension)
    int qmc_points = 512;    // dim > 3
    int qmc_replicas = 4;    // randomized shifts for the error estimate
    std::uint64_t seed = 1;
    int radial_intervals = 128;
    double tol = 0.0;        // 0: no error-budget check
};

// Indicatrix integration rule at x: directions v with F(v) = 1 and Xi weights.
struct IndicatrixRule {
    std::vector<Vec> directions;
    std::vector<double> weights;
};
IndicatrixRule indicatrix_rule(const ChartedSpace& s, const Vec& x, int angular, bool half_resolution = false);

struct VolumeResult {
    double volume = 0.0;
    double error_estimate = 0.0;
    std::vector<double> radii, volumes;  // when several radii are requested
};
// m(B+(x, r)) for each radius in `radii` (sorted ascending) with dm = e^{-psi} dvol.
VolumeResult ball_volumes(const ChartedSpace& s, const Vec& origin, const std::vector<double>& radii,
                          const QuadratureSpec& q = {});
double ball_volume(const ChartedSpace& s, const Vec& origin, double r, const QuadratureSpec& q = {});

CheckReport check_bishop_gromov(const ChartedSpace& s, const ComparisonParams& p, const Vec& origin, double r,
                                double R, const QuadratureSpec& q = {}, double tol = 1e-3);

// Radial integrals of e^{-psi} |det Y| along the unit-speed geodesic with
// initial direction v, up to each radius (ascending). Integration stops at the
// first conjugate point or chart exit; *clipped reports that.
std::vector<double> radial_masses(const ChartedSpace& s, const Vec& origin, const Vec& v,
                                  const std::vector<double>& radii, int intervals, bool* clipped = nullptr);

// Integral of a cubic Hermite segment from t0 to t0 + u*h (u in [0,1]).
double hermite_partial_integral(double h, double f0, double f1, double d0, double d1, double u);

}  // namespace finslercomp

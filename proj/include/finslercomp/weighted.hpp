// Weighted Ricci curvature, the epsilon-range constant, weight profiles
// along geodesics and the phi reparametrization.
#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "finslercomp/connection.hpp"
#include "finslercomp/report.hpp"

namespace finslercomp {

// Effective dimension N on the extended real line; infinities are exact.
struct ExtN {
    enum Kind { finite, plus_inf, minus_inf } kind = finite;
    double value = 0.0;

    static ExtN of(double v) {
        if (v == std::numeric_limits<double>::infinity()) return {plus_inf, 0.0};
        if (v == -std::numeric_limits<double>::infinity()) return {minus_inf, 0.0};
        return {finite, v};
    }
    static ExtN inf() { return {plus_inf, 0.0}; }
    bool is_infinite() const { return kind != finite; }
    double as_double() const {
        if (kind == plus_inf) return std::numeric_limits<double>::infinity();
        if (kind == minus_inf) return -std::numeric_limits<double>::infinity();
        return value;
    }
    std::string str() const;
};

// The dimension n entering Ric_N and the epsilon-range: dim (positive) or dim-1 (lorentzian).
int weighted_dimension(int dim, Signature sig);

// c(N, eps); throws HypothesisError naming the admissible interval.
double epsilon_range_constant(int dim, Signature sig, ExtN N, double eps);

struct ComparisonParams {
    ExtN N;
    double eps = 1.0;
    double K = 0.0;
    double a = 1.0;
    double b = 1.0;
    double c = 0.0;  // derived
    int m = 0;       // transverse dimension dim-1
    int n = 0;       // weighted dimension
    Signature signature = Signature::positive;
};
ComparisonParams make_params(int dim, Signature sig, ExtN N, double eps, double K = 0.0, double a = 1.0,
                             double b = 1.0);
ReportParams report_params(const ComparisonParams& p);

// psi_eta and its first two derivatives along the geodesic through (x, v), by nested duals.
struct FlowDerivatives {
    double psi = 0.0, dpsi = 0.0, ddpsi = 0.0;
};
FlowDerivatives psi_flow_derivatives(const ChartedSpace& s, const Vec& x, const Vec& v);

// Ric + psi'' - psi'^2/(N-n); N = n with psi' != 0 yields -infinity.
double weighted_ricci(const ChartedSpace& s, const Vec& x, const Vec& v, ExtN N);
double weighted_ricci_from(double ric, double dpsi, double ddpsi, ExtN N, int n);

struct WeightAlongGeodesic {
    std::vector<double> t, psi, dpsi, ddpsi;
    std::vector<double> phi;            // filled by reparametrize
    double eps = 1.0;
    int m = 1;
    double dual_disagreement = 0.0;     // max scaled gap between grid and dual derivatives
    bool dual_checked = false;

    double phi_at(double t) const;
    double phi_inverse(double tau) const;
    double psi_at(double t) const;  // quintic Hermite
};

// Profile from the space's weight evaluated on a path sampled on a uniform grid.
// Derivatives come from grid differentiation and are cross-checked by duals
// (NumericalError when the gap exceeds cross_check_tol).
WeightAlongGeodesic weight_along(const ChartedSpace& s, const GeodesicPath& path, double cross_check_tol = 1e-5);

// psi = log(sqrt|det g(eta')| / rho(eta)) for dm = rho dx.
WeightAlongGeodesic weight_from_density(const ChartedSpace& s, const std::function<double(const Vec&)>& density,
                                        const GeodesicPath& path);

struct Reparametrization {
    std::vector<double> phi;  // on the path grid
    double completeness_integral = 0.0;  // phi at the horizon
    double growth_rate = 0.0;            // (phi(H) - phi(H/2)) / (H/2)
};
// phi(t) = int_0^t exp(2(eps-1) psi / m) ds; also stores phi inside w.
Reparametrization reparametrize(WeightAlongGeodesic& w, double eps, int m);

// exp(-2(eps-1) psi / m) extremes over a profile.
std::pair<double, double> weight_factor_range(const WeightAlongGeodesic& w, double eps, int m);

using WeightedRicciFn = std::function<double(const Vec& x, const Vec& v, ExtN N)>;
// Checks Ric_n <= Ric_N <= Ric_inf <= Ric_N' <= Ric_1 at the samples.
CheckReport monotonicity_check(const ChartedSpace& s, const std::vector<std::pair<Vec, Vec>>& samples,
                               const std::vector<ExtN>& N_list, const WeightedRicciFn& ric = {});

// CSV: t, psi, dpsi, ddpsi, phi
std::string weight_csv(const WeightAlongGeodesic& w);

}  // namespace finslercomp

// Curvature tensor, Ricci and flag curvature, transverse Jacobi data and
// conjugate points.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "finslercomp/connection.hpp"

namespace finslercomp {

// Spray, nonlinear connection, curvature and fundamental tensor at one (x, v).
struct CurvaturePack {
    Vec G;
    Mat N;  // N(i,j) = N^i_j
    Mat R;  // R(i,j) = R^i_j
    Mat g;  // g_ij(v)
};
CurvaturePack curvature_pack(const ChartedSpace& s, const Vec& x, const Vec& v);

Mat curvature_operator(const ChartedSpace& s, const Vec& x, const Vec& v);
double ricci_scalar(const ChartedSpace& s, const Vec& x, const Vec& v);
// Sign convention follows the signature: lorentzian flags use the opposite sign.
double flag_curvature(const ChartedSpace& s, const Vec& x, const Vec& v, const Vec& w, double threshold = 1e-12);

struct TransverseOptions {
    int grid_intervals = 256;   // uniform grid on [0, horizon]
    double tol = 1e-10;         // integrator relative tolerance
    double frame_tolerance = 1e-6;
};

// Jacobi data in a parallel g-orthonormal frame of the complement of the velocity.
// E_i(t) = sum_j Y(t)(i,j) e_j(t) with Y(0)=0, Y'(0)=I, Y'' = -Y Rm.
struct TransverseData {
    GeodesicPath path;          // nodes on the uniform grid
    int m = 0;                  // transverse dimension
    double dt = 0.0;            // grid spacing
    std::vector<Mat> frame;     // n x m, columns e_a(t)
    std::vector<Mat> Y, Yp;     // m x m
    std::vector<Mat> Rm;        // g(R(e_a), e_b)
    std::vector<Mat> A, B, Rmat;  // a_ij = g(E_i,E_j); D E_i = sum b_ij E_j; g(R(E_i),E_j)
    std::vector<double> det_A, trace_B, ricci;
    double frame_drift = 0.0;
    std::optional<double> singular_t;  // earliest t where A degenerates (set by first_conjugate_point)

    std::size_t size() const { return path.t.size(); }
    // Hermite-interpolated Y at arbitrary t.
    Mat Y_at(double t) const;
    // Coordinate Jacobi fields E_i(t) as columns (n x m).
    Mat jacobi_fields(std::size_t k) const { return frame[k] * Y[k].transpose(); }
};

TransverseData transverse_data(const ChartedSpace& s, const Vec& x0, const Vec& v0, double horizon,
                               const TransverseOptions& opt = {});

// Smallest conjugate time on the path, refined to 1e-7; none when absent.
std::optional<double> first_conjugate_point(const TransverseData& td);

// Residuals of BA = AB^T, A' = 2BA, A'' = 2B^2 A - 2R and of g(velocity, E_i) = 0,
// over grid nodes before the first conjugate point (outside the end windows).
// A' and A'' come from grid differentiation. Values are max-abs entries
// relative to max(1, |A|, |B A|, |R|).
struct MatrixLemmaResiduals {
    double commutator = 0.0, first = 0.0, second = 0.0, gauss = 0.0;
    int nodes = 0;
};
MatrixLemmaResiduals matrix_lemma_residuals(const ChartedSpace& s, const TransverseData& td, double window = 0.05);

// CSV: t, detA, traceB
std::string transverse_csv(const TransverseData& td);

// Orthonormal basis (w.r.t. g) of the g-orthogonal complement of v, by Gram-Schmidt.
Mat orthonormal_complement(const Mat& g, const Vec& v);

}  // namespace finslercomp

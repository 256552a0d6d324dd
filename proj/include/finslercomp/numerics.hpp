// Grid differentiation, interpolation and quadrature helpers.
#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace finslercomp {

// Finite-difference weights (Fornberg) for derivatives 0..order at z from nodes.
std::vector<std::vector<double>> fd_weights(double z, const std::vector<double>& nodes, int order);

// First and second derivatives of samples on a uniform grid, from local
// degree-6 polynomials (7-point stencils, one-sided near the ends).
struct GridDerivatives {
    std::vector<double> d1, d2;
};
GridDerivatives uniform_derivatives(const std::vector<double>& f, double dt);

// Piecewise quintic Hermite interpolation from values, first and second derivatives.
double quintic_hermite(double t0, double t1, double f0, double f1, double d0, double d1, double s0, double s1,
                       double t);

// Adaptive Gauss-Kronrod on [a, b] with relative tolerance.
double integrate(const std::function<double(double)>& f, double a, double b, double rtol = 1e-10,
                 double* error = nullptr);

// Gauss-Legendre nodes and weights on [a, b].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int count, double a, double b);

// Radical-inverse (Halton) point in [0,1) for quasi-Monte Carlo.
double halton(int index, int base);

}  // namespace finslercomp

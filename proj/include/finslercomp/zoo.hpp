// Model spaces with closed-form oracles.
#pragma once

#include <string>
#include <vector>

#include "finslercomp/space.hpp"

namespace finslercomp {

struct ZooParams {
    int n = 2;              // dimension (positive) or spatial dimension (lorentzian, dim = n+1)
    double b = 0.5;         // Randers drift, |b| < 1
    double lambda = 1.0;    // Gaussian weight strength
    std::string warp = "cos";  // FLRW warp: cos | cosh | exp
    int k = 4;              // Beem index
};

struct ZooEntry {
    std::string name;
    std::string signature;
    std::string description;
};

const std::vector<ZooEntry>& zoo_list();
ChartedSpace build_zoo(const std::string& name, const ZooParams& p = {});

// Euclidean coordinate density of the Gaussian measure exp(-lambda |x|^2 / 2).
double gaussian_density(const Vec& x, double lambda);

}  // namespace finslercomp

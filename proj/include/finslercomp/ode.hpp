// Adaptive Dormand-Prince 5(4) integrator with cubic Hermite dense output.
#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "finslercomp/space.hpp"

namespace finslercomp {

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double h0 = 0.0;  // 0 picks an initial step automatically
    double hmax = std::numeric_limits<double>::infinity();
    std::vector<double> stops;  // step boundaries forced here (sorted)
    bool record_only_stops = false;
    int max_steps = 500000;
    double y_max = std::numeric_limits<double>::infinity();  // stop when a state entry exceeds this
};

struct OdeSolution {
    std::vector<double> t;
    std::vector<Vec> y;
    std::vector<Vec> f;  // dy/dt at the nodes
    bool completed = false;
    double t_reached = 0.0;
    std::string stop_reason;  // empty when completed
    long rhs_evals = 0;

    // Cubic Hermite interpolation between stored nodes.
    Vec eval(double tq) const;
    Vec deriv(double tq) const;
};

// rhs may throw DomainError to signal leaving the admissible region; the
// step is then shortened and, if it cannot proceed, integration stops.
using OdeRhs = std::function<Vec(double t, const Vec& y)>;

OdeSolution integrate_dp54(const OdeRhs& rhs, double t0, const Vec& y0, double t_end, const OdeOptions& opt);

// Hermite interpolation helpers on one interval.
Vec hermite_value(double t0, double t1, const Vec& y0, const Vec& y1, const Vec& f0, const Vec& f1, double t);
Vec hermite_deriv(double t0, double t1, const Vec& y0, const Vec& y1, const Vec& f0, const Vec& f1, double t);

}  // namespace finslercomp

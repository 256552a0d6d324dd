// Scenario files: space, weight, comparison parameters, geodesic bundle and
// the list of checks to run.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "finslercomp/weighted.hpp"
#include "finslercomp/zoo.hpp"

namespace finslercomp {

// Rejected scenario; `field` is the JSON path of the offending entry.
struct ScenarioError : Error {
    std::string field;
    ScenarioError(const std::string& f, const std::string& msg) : Error(f + ": " + msg), field(f) {}
};

struct SpaceSpec {
    std::string zoo;  // empty for an expression Lagrangian
    ZooParams zoo_params;
    std::string lagrangian;  // expression in x0.., v0..
    std::string domain;      // expression, point is inside when > 0
    int dim = 0;
    Signature signature = Signature::positive;
    std::vector<double> time_orientation;
    std::map<std::string, double> constants;
};

struct WeightSpec {
    enum Kind { space_default, none, gaussian, expression, density } kind = space_default;
    double lambda = 1.0;
    std::string expr;  // psi(x, v) or rho(x)
};

struct BundleSpec {
    std::vector<double> origin;
    std::vector<std::vector<double>> directions;  // explicit list
    int grid = 0;                                 // deterministic spread of directions
    int random = 0;                               // random directions from `seed`
    double rapidity = 0.5;                        // lorentzian spread around the time orientation
    double horizon = 1.0;
};

struct CheckSpec {
    std::string name;
    std::optional<double> tol;
    nlohmann::json options;  // check-specific fields
};

struct Scenario {
    std::string id;
    SpaceSpec space;
    WeightSpec weight;
    std::optional<ExtN> N;  // default: the dimension of the space
    double eps = 1.0, K = 0.0, a = 1.0, b = 1.0;
    BundleSpec bundle;
    std::vector<CheckSpec> checks;
    std::uint64_t seed = 1;
    std::string report_name;  // file name of the JSON report inside the output directory
};

const std::vector<std::string>& known_checks();

Scenario parse_scenario(const nlohmann::json& j);
// Reads and validates; parse errors carry the byte position.
Scenario load_scenario(const std::string& path);

ChartedSpace build_space(const Scenario& sc);
// Params for the scenario's space; throws ScenarioError naming the admissible eps interval.
ComparisonParams scenario_params(const Scenario& sc, const ChartedSpace& s);

// Initial directions of the geodesic bundle (not normalized).
std::vector<Vec> bundle_directions(const Scenario& sc, const ChartedSpace& s);

// psi(x, v) = log(sqrt|det g_v| / rho(x)) as a weight field.
TMField density_weight(const TMField& lagrangian, int dim, const TMField& rho);

}  // namespace finslercomp

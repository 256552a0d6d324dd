#include <cmath>
#include <iostream>

#include <CLI11.hpp>

#include "finslercomp/lorentz.hpp"
#include "finslercomp/runner.hpp"
#include "finslercomp/zoo.hpp"

using namespace finslercomp;
using nlohmann::json;

namespace {

// "key=value" with a JSON value, falling back to a plain string.
void put_option(json& check, const std::string& kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw ScenarioError("--opt", "expected key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    json parsed = json::parse(val, nullptr, false);
    check[key] = parsed.is_discarded() ? json(val) : parsed;
}

int print_outcome(const CheckOutcome& o) {
    ojson j = ojson::object();
    j["name"] = o.name;
    j["status"] = o.status;
    if (!o.error.empty()) j["error"] = o.error;
    j["report"] = report_json(o.report);
    std::cout << dump(j);
    return combine_exit_codes({o});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted comparison geometry checks on Finsler and Lorentz-Finsler spaces"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    auto* run = app.add_subcommand("run", "run a scenario file");
    run->add_option("scenario", scenario_path, "scenario JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory for the report and CSV profiles");
    run->add_option("--tol", tol, "override every check tolerance");
    run->add_option("--seed", seed, "override the scenario seed");

    auto* zoo = app.add_subcommand("zoo", "built-in spaces");
    zoo->add_subcommand("list", "list the built-in spaces");
    zoo->require_subcommand(1);

    std::string check_name, space = "euclidean", warp = "cos", N;
    int n = 2, k = 4, grid = 0;
    double drift = 0.5, lambda = 1.0, eps = 1.0, K = 0.0, a = 1.0, b = 1.0, horizon = 1.0;
    std::vector<double> origin, direction;
    std::vector<std::string> opts;
    auto* check = app.add_subcommand("check", "run one check on a built-in space");
    check->add_option("name", check_name, "check name")->required();
    check->add_option("--space", space, "built-in space")->required();
    check->add_option("--n", n, "dimension (spatial dimension for spacetimes)");
    check->add_option("--drift", drift, "Randers drift");
    check->add_option("--lambda", lambda, "Gaussian weight strength");
    check->add_option("--warp", warp, "FLRW warp: cos | cosh | exp");
    check->add_option("--k", k, "Beem index");
    check->add_option("--N", N, "effective dimension, a number or inf (default: the dimension)");
    check->add_option("--eps", eps);
    check->add_option("--K", K, "curvature lower bound");
    check->add_option("--a", a);
    check->add_option("--b", b);
    check->add_option("--horizon", horizon, "geodesic length");
    check->add_option("--grid", grid, "number of bundle directions");
    check->add_option("--origin", origin, "bundle base point");
    check->add_option("--direction", direction, "single initial direction (instead of --grid)");
    check->add_option("--tol", tol, "check tolerance");
    check->add_option("--seed", seed, "random seed");
    check->add_option("--opt", opts, "check option key=value (value parsed as JSON)");

    int leg_k = 4;
    double angle = 0.0, radius = 1.0;
    std::string leg_space = "beem";
    auto* leg = app.add_subcommand("legendre", "Legendre transform of r(cos a, sin a) on a planar spacetime");
    leg->add_option("--space", leg_space, "beem | minkowski")->check(CLI::IsMember({"beem", "minkowski"}));
    leg->add_option("--k", leg_k, "Beem index");
    leg->add_option("--angle", angle, "direction angle in radians")->required();
    leg->add_option("--r", radius, "vector length");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            Scenario sc = load_scenario(scenario_path);
            RunOptions ro{out_dir, tol, seed};
            RunResult res = run_scenario(sc, ro);
            if (out_dir.empty()) std::cout << dump(res.report);
            for (const auto& o : res.outcomes)
                std::cerr << o.name << ": " << o.status << (o.error.empty() ? "" : " (" + o.error + ")") << "\n";
            return res.exit_code;
        }
        if (zoo->parsed()) {
            for (const auto& e : zoo_list())
                std::cout << e.name << "\t" << e.signature << "\t" << e.description << "\n";
            return 0;
        }
        if (check->parsed()) {
            json j;
            j["id"] = "cli-" + check_name;
            j["space"] = {{"zoo", space}, {"n", n}, {"b", drift}, {"lambda", lambda}, {"warp", warp}, {"k", k}};
            j["params"] = {{"eps", eps}, {"K", K}, {"a", a}, {"b", b}};
            if (!N.empty()) j["params"]["N"] = N == "inf" || N == "-inf" ? json(N) : json(std::stod(N));
            j["bundle"] = {{"horizon", horizon}};
            if (grid > 0) j["bundle"]["grid"] = grid;
            if (!origin.empty()) j["bundle"]["origin"] = origin;
            if (!direction.empty()) j["bundle"]["directions"] = json::array({direction});
            json c = {{"name", check_name}};
            for (const auto& kv : opts) put_option(c, kv);
            j["checks"] = json::array({c});
            if (seed) j["seed"] = *seed;
            Scenario sc = parse_scenario(j);
            return print_outcome(run_check(sc, sc.checks.front(), RunOptions{"", tol, seed}));
        }
        if (leg->parsed()) {
            ZooParams zp;
            zp.k = leg_k;
            zp.n = 1;
            ChartedSpace s = build_zoo(leg_space, zp);
            Vec x = Vec::Zero(2), v(2);
            v << radius * std::cos(angle), radius * std::sin(angle);
            Vec w = legendre(s, x, v);
            CausalClass cc = classify(s, x, v);
            ojson j = ojson::object();
            j["space"] = leg_space;
            j["k"] = leg_k;
            j["angle"] = number_json(angle);
            j["vector"] = {number_json(v[0]), number_json(v[1])};
            j["lagrangian"] = number_json(s.L(x, v));
            j["causal"] = to_string(cc.kind);
            j["future"] = cc.future;
            j["covector"] = {number_json(w[0]), number_json(w[1])};
            if (cc.kind == CausalKind::timelike && cc.future) {
                Vec back = legendre_inverse(s, x, w);
                j["inverse"] = {number_json(back[0]), number_json(back[1])};
                j["dual_lagrangian"] = number_json(dual_lagrangian(s, x, w));
            }
            std::cout << dump(j);
            return 0;
        }
    } catch (const ScenarioError& e) {
        std::cerr << "invalid scenario: " << e.what() << "\n";
        return exit_hypothesis;
    } catch (const HypothesisError& e) {
        std::cerr << "hypothesis rejected: " << e.what() << "\n";
        return exit_hypothesis;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    }
    return 0;
}

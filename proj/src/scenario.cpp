#include "finslercomp/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "finslercomp/curvature.hpp"
#include "finslercomp/detail/jets.hpp"
#include "finslercomp/expr.hpp"
#include "finslercomp/numerics.hpp"
#include "finslercomp/util.hpp"

namespace finslercomp {

using nlohmann::json;

namespace {

template <class T>
struct depth : std::integral_constant<int, 0> {};
template <class T>
struct depth<Dual<T>> : std::integral_constant<int, 1 + depth<T>::value> {};

// Determinant by elimination on a row-major n x n array.
template <class T>
T det_generic(std::vector<T> A, int n) {
    T d(1.0);
    for (int c = 0; c < n; ++c) {
        int p = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(primal(A[r * n + c])) > std::abs(primal(A[p * n + c]))) p = r;
        if (primal(A[p * n + c]) == 0.0) return T(0.0);
        if (p != c) {
            for (int j = 0; j < n; ++j) std::swap(A[c * n + j], A[p * n + j]);
            d = -d;
        }
        d = d * A[c * n + c];
        for (int r = c + 1; r < n; ++r) {
            T f = A[r * n + c] / A[c * n + c];
            for (int j = c; j < n; ++j) A[r * n + j] -= f * A[c * n + j];
        }
    }
    return d;
}

const json& need(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ScenarioError(where + "." + key, "required field missing");
    return j.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ScenarioError(where, "expected a number");
    return j.get<double>();
}

std::vector<double> number_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw ScenarioError(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ScenarioError(where + "." + it.key(), "unknown field");
}

ExtN parse_N(const json& j, const std::string& where) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return ExtN::inf();
        if (s == "-inf") return ExtN::of(-std::numeric_limits<double>::infinity());
        throw ScenarioError(where, "N must be a number, \"inf\" or \"-inf\"");
    }
    return ExtN::of(number(j, where));
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), Eigen::Index(v.size())); }

}  // namespace

const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> names = {
        "structure",   "curvature_identities", "conjugate_points", "matrix_lemma",     "bishop",
        "bonnet_myers", "laplacian",           "bishop_gromov",    "monotonicity",     "raychaudhuri",
        "legendre",    "sclv",                 "hessian_symmetry",
    };
    return names;
}

TMField density_weight(const TMField& lagrangian, int dim, const TMField& rho) {
    return TMField::from([lagrangian, dim, rho](const auto* x, const auto* v) {
        using T = std::remove_cv_t<std::remove_reference_t<decltype(*x)>>;
        if constexpr (depth<T>::value <= 2) {
            using std::abs, std::log, std::sqrt;
            auto g = detail::vertical_hessian<T>(lagrangian, dim, x, v);
            T d = det_generic(g, dim);
            return T(log(sqrt(abs(d)) / rho(x, v)));
        } else {
            throw NumericalError("density weight: derivative order above 2 requested");
            return T(0.0);
        }
    });
}

Scenario parse_scenario(const json& j) {
    if (!j.is_object()) throw ScenarioError("$", "scenario must be a JSON object");
    only_keys(j, {"id", "description", "space", "weight", "params", "bundle", "checks", "seed", "report"}, "$");
    Scenario sc;
    const json& id = need(j, "id", "$");
    if (!id.is_string() || id.get<std::string>().empty()) throw ScenarioError("$.id", "expected a non-empty string");
    sc.id = id.get<std::string>();
    for (char c : sc.id)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
            throw ScenarioError("$.id", "only letters, digits, '_', '-' and '.' are allowed");

    const json& sp = need(j, "space", "$");
    if (!sp.is_object()) throw ScenarioError("$.space", "expected an object");
    if (sp.contains("zoo")) {
        only_keys(sp, {"zoo", "n", "b", "lambda", "warp", "k"}, "$.space");
        sc.space.zoo = sp["zoo"].get<std::string>();
        bool found = false;
        std::string names;
        for (const auto& e : zoo_list()) {
            found |= e.name == sc.space.zoo;
            names += (names.empty() ? "" : ", ") + e.name;
        }
        if (!found) throw ScenarioError("$.space.zoo", "unknown space '" + sc.space.zoo + "'; available: " + names);
        auto& zp = sc.space.zoo_params;
        if (sp.contains("n")) zp.n = int(number(sp["n"], "$.space.n"));
        if (sp.contains("b")) zp.b = number(sp["b"], "$.space.b");
        if (sp.contains("lambda")) zp.lambda = number(sp["lambda"], "$.space.lambda");
        if (sp.contains("k")) zp.k = int(number(sp["k"], "$.space.k"));
        if (sp.contains("warp")) zp.warp = sp["warp"].get<std::string>();
    } else {
        only_keys(sp, {"lagrangian", "dim", "signature", "domain", "time_orientation", "constants"}, "$.space");
        sc.space.lagrangian = need(sp, "lagrangian", "$.space").get<std::string>();
        sc.space.dim = int(number(need(sp, "dim", "$.space"), "$.space.dim"));
        if (sc.space.dim < 2) throw ScenarioError("$.space.dim", "dimension must be at least 2");
        std::string sig = sp.value("signature", "positive");
        if (sig == "positive") sc.space.signature = Signature::positive;
        else if (sig == "lorentzian") sc.space.signature = Signature::lorentzian;
        else throw ScenarioError("$.space.signature", "expected \"positive\" or \"lorentzian\"");
        if (sp.contains("domain")) sc.space.domain = sp["domain"].get<std::string>();
        if (sp.contains("time_orientation"))
            sc.space.time_orientation = number_list(sp["time_orientation"], "$.space.time_orientation");
        if (sp.contains("constants"))
            for (auto it = sp["constants"].begin(); it != sp["constants"].end(); ++it)
                sc.space.constants[it.key()] = number(it.value(), "$.space.constants." + it.key());
    }

    if (j.contains("weight")) {
        const json& w = j["weight"];
        if (w.is_null() || (w.is_string() && w.get<std::string>() == "none")) {
            sc.weight.kind = WeightSpec::none;
        } else if (w.is_object()) {
            only_keys(w, {"type", "lambda", "expr"}, "$.weight");
            std::string t = need(w, "type", "$.weight").get<std::string>();
            if (t == "none") sc.weight.kind = WeightSpec::none;
            else if (t == "gaussian") {
                sc.weight.kind = WeightSpec::gaussian;
                sc.weight.lambda = number(need(w, "lambda", "$.weight"), "$.weight.lambda");
            } else if (t == "expression" || t == "density") {
                sc.weight.kind = t == "density" ? WeightSpec::density : WeightSpec::expression;
                sc.weight.expr = need(w, "expr", "$.weight").get<std::string>();
            } else {
                throw ScenarioError("$.weight.type", "expected none, gaussian, expression or density");
            }
        } else {
            throw ScenarioError("$.weight", "expected an object, null or \"none\"");
        }
    }

    if (j.contains("params")) {
        const json& p = j["params"];
        only_keys(p, {"N", "eps", "K", "a", "b"}, "$.params");
        if (p.contains("N")) sc.N = parse_N(p["N"], "$.params.N");
        if (p.contains("eps")) sc.eps = number(p["eps"], "$.params.eps");
        if (p.contains("K")) sc.K = number(p["K"], "$.params.K");
        if (p.contains("a")) sc.a = number(p["a"], "$.params.a");
        if (p.contains("b")) sc.b = number(p["b"], "$.params.b");
    }
    if (!(sc.a > 0.0)) throw ScenarioError("$.params.a", "a must be positive");
    if (!(sc.b >= sc.a)) throw ScenarioError("$.params.b", "b must satisfy b >= a");

    if (j.contains("bundle")) {
        const json& b = j["bundle"];
        only_keys(b, {"origin", "directions", "grid", "random", "rapidity", "horizon"}, "$.bundle");
        if (b.contains("origin")) sc.bundle.origin = number_list(b["origin"], "$.bundle.origin");
        if (b.contains("directions")) {
            if (!b["directions"].is_array()) throw ScenarioError("$.bundle.directions", "expected an array");
            for (std::size_t i = 0; i < b["directions"].size(); ++i)
                sc.bundle.directions.push_back(
                    number_list(b["directions"][i], "$.bundle.directions[" + std::to_string(i) + "]"));
        }
        if (b.contains("grid")) sc.bundle.grid = int(number(b["grid"], "$.bundle.grid"));
        if (b.contains("random")) sc.bundle.random = int(number(b["random"], "$.bundle.random"));
        if (b.contains("rapidity")) sc.bundle.rapidity = number(b["rapidity"], "$.bundle.rapidity");
        if (b.contains("horizon")) sc.bundle.horizon = number(b["horizon"], "$.bundle.horizon");
        if (!(sc.bundle.horizon > 0.0)) throw ScenarioError("$.bundle.horizon", "horizon must be positive");
        if (sc.bundle.grid < 0 || sc.bundle.random < 0) throw ScenarioError("$.bundle", "counts must be >= 0");
    }

    const json& checks = need(j, "checks", "$");
    if (!checks.is_array() || checks.empty()) throw ScenarioError("$.checks", "expected a non-empty array");
    const auto& known = known_checks();
    for (std::size_t i = 0; i < checks.size(); ++i) {
        std::string where = "$.checks[" + std::to_string(i) + "]";
        CheckSpec cs;
        if (checks[i].is_string()) {
            cs.name = checks[i].get<std::string>();
            cs.options = json::object();
        } else if (checks[i].is_object()) {
            cs.name = need(checks[i], "name", where).get<std::string>();
            cs.options = checks[i];
            cs.options.erase("name");
            if (cs.options.contains("tol")) {
                cs.tol = number(cs.options["tol"], where + ".tol");
                cs.options.erase("tol");
            }
        } else {
            throw ScenarioError(where, "expected a check name or object");
        }
        if (std::find(known.begin(), known.end(), cs.name) == known.end()) {
            std::string names;
            for (const auto& k : known) names += (names.empty() ? "" : ", ") + k;
            throw ScenarioError(where + ".name", "unknown check '" + cs.name + "'; available: " + names);
        }
        sc.checks.push_back(std::move(cs));
    }
    if (j.contains("seed")) sc.seed = j["seed"].get<std::uint64_t>();
    sc.report_name = j.value("report", sc.id + ".report.json");
    return sc;
}

ChartedSpace build_space(const Scenario& sc) {
    ChartedSpace s;
    try {
        if (!sc.space.zoo.empty()) {
            s = build_zoo(sc.space.zoo, sc.space.zoo_params);
        } else {
            const auto& ss = sc.space;
            s.name = "expression";
            s.dim = ss.dim;
            s.signature = ss.signature;
            Expr L = Expr::parse(ss.lagrangian, ss.dim, ss.constants);
            s.lagrangian = L.field();
            if (!ss.domain.empty()) {
                Expr d = Expr::parse(ss.domain, ss.dim, ss.constants);
                if (d.uses_v()) throw ScenarioError("$.space.domain", "the domain may not depend on v");
                s.chart_domain = [d](const Vec& x) { return d(x, x) > 0.0; };
            }
            if (ss.signature == Signature::lorentzian) {
                if (ss.time_orientation.size() != std::size_t(ss.dim))
                    throw ScenarioError("$.space.time_orientation", "lorentzian spaces need a constant vector");
                Vec X = to_vec(ss.time_orientation);
                s.time_orientation = [X](const Vec&) { return X; };
            }
        }
    } catch (const ParseError& e) {
        throw ScenarioError("$.space", e.what());
    } catch (const ScenarioError&) {
        throw;
    } catch (const Error& e) {
        throw ScenarioError("$.space", e.what());
    }
    try {
        switch (sc.weight.kind) {
            case WeightSpec::space_default: break;
            case WeightSpec::none: s.weight.reset(); break;
            case WeightSpec::gaussian: {
                if (!(sc.weight.lambda > 0.0)) throw ScenarioError("$.weight.lambda", "lambda must be positive");
                int n = s.dim;
                double lam = sc.weight.lambda;
                s.weight = TMField::from([n, lam](const auto* x, const auto*) {
                    auto r = x[0] * x[0];
                    for (int i = 1; i < n; ++i) r += x[i] * x[i];
                    return 0.5 * lam * r;
                });
                break;
            }
            case WeightSpec::expression: s.weight = Expr::parse(sc.weight.expr, s.dim, sc.space.constants).field(); break;
            case WeightSpec::density: {
                Expr rho = Expr::parse(sc.weight.expr, s.dim, sc.space.constants);
                if (rho.uses_v()) throw ScenarioError("$.weight.expr", "a density may not depend on v");
                s.weight = density_weight(s.lagrangian, s.dim, rho.field());
                break;
            }
        }
    } catch (const ParseError& e) {
        throw ScenarioError("$.weight.expr", e.what());
    }
    return s;
}

ComparisonParams scenario_params(const Scenario& sc, const ChartedSpace& s) {
    try {
        return make_params(s.dim, s.signature, sc.N ? *sc.N : ExtN::of(weighted_dimension(s.dim, s.signature)), sc.eps, sc.K, sc.a, sc.b);
    } catch (const HypothesisError& e) {
        throw ScenarioError("$.params", e.what());
    }
}

std::vector<Vec> bundle_directions(const Scenario& sc, const ChartedSpace& s) {
    const int n = s.dim;
    Vec origin = sc.bundle.origin.empty() ? Vec::Zero(n) : to_vec(sc.bundle.origin);
    std::vector<Vec> out;
    for (const auto& d : sc.bundle.directions) out.push_back(to_vec(d));
    int grid = sc.bundle.grid;
    if (out.empty() && grid == 0 && sc.bundle.random == 0) grid = s.signature == Signature::positive ? 4 : 1;

    if (s.signature == Signature::positive) {
        if (n == 2) {
            for (int j = 0; j < grid; ++j) {
                double th = 2.0 * M_PI * j / grid;
                out.push_back((Vec(2) << std::cos(th), std::sin(th)).finished());
            }
        } else {
            // Fibonacci-type spread on the first three coordinates
            for (int j = 0; j < grid; ++j) {
                double z = 1.0 - (2.0 * j + 1.0) / grid;
                double r = std::sqrt(std::max(0.0, 1.0 - z * z));
                double ph = j * M_PI * (3.0 - std::sqrt(5.0));
                Vec v = Vec::Zero(n);
                v[0] = r * std::cos(ph);
                v[1] = r * std::sin(ph);
                v[2] = z;
                out.push_back(v);
            }
        }
        Rng rng(sc.seed);
        for (int j = 0; j < sc.bundle.random; ++j) {
            Vec v(n);
            for (int i = 0; i < n; ++i) v[i] = rng.normal();
            out.push_back(v);
        }
        return out;
    }

    Vec X = s.time_orientation ? s.time_orientation(origin) : Vec::Unit(n, 0);
    Mat E = orthonormal_complement(vertical_hessian(s, origin, X), X);
    Vec A = X / std::sqrt(-2.0 * s.L(origin, X));
    int m = n - 1;
    double rho = std::tanh(sc.bundle.rapidity);
    if (grid == 1) {
        out.push_back(A);
    } else if (grid > 1) {
        out.push_back(A);
        for (int j = 0; j < grid - 1; ++j) {
            Vec y = Vec::Zero(m);
            if (m == 1) {
                y[0] = rho * (j % 2 == 0 ? 1.0 : -1.0) * (1.0 + j / 2) / (grid / 2);
            } else {
                double th = 2.0 * M_PI * j / (grid - 1);
                y[0] = rho * std::cos(th);
                y[1] = rho * std::sin(th);
            }
            out.push_back(A + E * y);
        }
    }
    Rng rng(sc.seed);
    for (int j = 0; j < sc.bundle.random; ++j) {
        Vec y(m);
        for (int i = 0; i < m; ++i) y[i] = rng.normal();
        y *= rho * std::pow(rng.uniform(), 1.0 / m) / std::max(1e-300, y.norm());
        out.push_back(A + E * y);
    }
    return out;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError(path, "cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ScenarioError(path, "JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    Scenario sc;
    try {
        sc = parse_scenario(j);
    } catch (const json::exception& e) {
        throw ScenarioError(path, std::string("type error: ") + e.what());
    }
    // cross-references: build the space, validate params, origin and directions
    ChartedSpace s = build_space(sc);
    scenario_params(sc, s);
    if (!sc.space.lagrangian.empty()) {
        HomogeneityOptions ho;
        auto rep = validate_homogeneity(s, 20, sc.seed, ho);
        if (!rep.pass)
            throw ScenarioError("$.space.lagrangian", "structure validation failed (max residual " +
                                                          std::to_string(rep.max_violation) + ")");
    }
    if (!sc.bundle.origin.empty()) {
        if (int(sc.bundle.origin.size()) != s.dim)
            throw ScenarioError("$.bundle.origin", "expected " + std::to_string(s.dim) + " coordinates");
        if (!s.in_domain(to_vec(sc.bundle.origin))) throw ScenarioError("$.bundle.origin", "outside the chart");
    }
    Vec origin = sc.bundle.origin.empty() ? Vec::Zero(s.dim) : to_vec(sc.bundle.origin);
    if (!s.in_domain(origin)) throw ScenarioError("$.bundle.origin", "default origin 0 is outside the chart");
    auto dirs = bundle_directions(sc, s);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        std::string where = "$.bundle.directions[" + std::to_string(i) + "]";
        if (dirs[i].size() != s.dim) throw ScenarioError(where, "wrong dimension");
        if (!is_admissible(s, origin, dirs[i]) ||
            (s.signature == Signature::lorentzian && !future_directed(s, origin, dirs[i])))
            throw ScenarioError(where, s.signature == Signature::lorentzian
                                           ? "direction must be future timelike"
                                           : "direction must be nonzero");
    }
    return sc;
}

}  // namespace finslercomp

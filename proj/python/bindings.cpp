#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "finslercomp/lorentz.hpp"
#include "finslercomp/runner.hpp"
#include "finslercomp/zoo.hpp"

namespace py = pybind11;
using namespace finslercomp;

namespace {

// Scenarios and reports cross the boundary as JSON text; the package
// wrapper turns them into dicts.
py::tuple run_json(const std::string& scenario_text, const std::string& out_dir, std::optional<double> tol,
                   std::optional<std::uint64_t> seed) {
    Scenario sc = parse_scenario(nlohmann::json::parse(scenario_text));
    RunResult r;
    {
        py::gil_scoped_release release;
        r = run_scenario(sc, RunOptions{out_dir, tol, seed});
    }
    return py::make_tuple(r.exit_code, dump(r.report));
}

py::tuple run_file(const std::string& path, const std::string& out_dir, std::optional<double> tol,
                   std::optional<std::uint64_t> seed) {
    Scenario sc = load_scenario(path);
    RunResult r;
    {
        py::gil_scoped_release release;
        r = run_scenario(sc, RunOptions{out_dir, tol, seed});
    }
    return py::make_tuple(r.exit_code, dump(r.report));
}

double eps_constant(int dim, const std::string& signature, double N, double eps) {
    Signature sig = signature == "lorentzian" ? Signature::lorentzian : Signature::positive;
    return epsilon_range_constant(dim, sig, ExtN::of(N), eps);
}

ChartedSpace zoo_space(const std::string& name, int n, int k) {
    ZooParams zp;
    zp.n = n;
    zp.k = k;
    return build_zoo(name, zp);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Weighted comparison checks on Finsler and Lorentz-Finsler spaces";

    py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
    py::register_exception<HypothesisError>(m, "HypothesisError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("run_scenario_json", &run_json, py::arg("scenario"), py::arg("out_dir") = "",
          py::arg("tol") = py::none(), py::arg("seed") = py::none());
    m.def("run_scenario_file", &run_file, py::arg("path"), py::arg("out_dir") = "", py::arg("tol") = py::none(),
          py::arg("seed") = py::none());
    m.def("known_checks", &known_checks);
    m.def("zoo_list", [] {
        std::vector<std::tuple<std::string, std::string, std::string>> out;
        for (const auto& e : zoo_list()) out.emplace_back(e.name, e.signature, e.description);
        return out;
    });
    m.def("epsilon_range_constant", &eps_constant, py::arg("dim"), py::arg("signature"), py::arg("N"),
          py::arg("eps"));
    m.def("comparison_s", [](double kappa, double t) { return comparison_s(kappa, t).s; });

    m.def("lagrangian", [](const std::string& space, const std::vector<double>& x, const std::vector<double>& v,
                           int n, int k) {
        ChartedSpace s = zoo_space(space, n, k);
        Vec xv = Eigen::Map<const Vec>(x.data(), Eigen::Index(x.size()));
        Vec vv = Eigen::Map<const Vec>(v.data(), Eigen::Index(v.size()));
        return s.L(xv, vv);
    }, py::arg("space"), py::arg("x"), py::arg("v"), py::arg("n") = 2, py::arg("k") = 4);

    m.def("legendre", [](const std::string& space, const std::vector<double>& x, const std::vector<double>& v,
                         int n, int k) {
        ChartedSpace s = zoo_space(space, n, k);
        Vec xv = Eigen::Map<const Vec>(x.data(), Eigen::Index(x.size()));
        Vec vv = Eigen::Map<const Vec>(v.data(), Eigen::Index(v.size()));
        Vec w = legendre(s, xv, vv);
        return std::vector<double>(w.data(), w.data() + w.size());
    }, py::arg("space"), py::arg("x"), py::arg("v"), py::arg("n") = 1, py::arg("k") = 4);

    m.def("legendre_inverse", [](const std::string& space, const std::vector<double>& x,
                                 const std::vector<double>& omega, int n, int k) {
        ChartedSpace s = zoo_space(space, n, k);
        Vec xv = Eigen::Map<const Vec>(x.data(), Eigen::Index(x.size()));
        Vec w = Eigen::Map<const Vec>(omega.data(), Eigen::Index(omega.size()));
        Vec v = legendre_inverse(s, xv, w);
        return std::vector<double>(v.data(), v.data() + v.size());
    }, py::arg("space"), py::arg("x"), py::arg("omega"), py::arg("n") = 1, py::arg("k") = 4);
}

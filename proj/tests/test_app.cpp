#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <doctest.h>

#include "finslercomp/expr.hpp"
#include "finslercomp/lagrangian.hpp"
#include "finslercomp/runner.hpp"
#include "finslercomp/util.hpp"

using namespace finslercomp;
using nlohmann::json;

namespace {

json small_scenario() {
    return json::parse(R"({
      "id": "unit_sphere_conjugate",
      "space": {"zoo": "sphere", "n": 2},
      "bundle": {"origin": [1, 0], "directions": [[0, 1]], "horizon": 4},
      "checks": [{"name": "conjugate_points", "tol": 1e-3, "expected": 3.141592653589793}]
    })");
}

CheckOutcome outcome(const std::string& status) {
    CheckOutcome o;
    o.status = status;
    return o;
}

}  // namespace

TEST_CASE("expression grammar") {
    Expr e = Expr::parse("x0^2 + 3*sin(v1) - a/2", 2, {{"a", 4.0}});
    Vec x(2), v(2);
    x << 1.5, 0.0;
    v << 0.0, 0.4;
    CHECK(e(x, v) == doctest::Approx(2.25 + 3 * std::sin(0.4) - 2));
    CHECK(e.uses_v());
    CHECK(Expr::parse("-x1^2", 2)(x, v) == doctest::Approx(-0.0));
    CHECK(Expr::parse("2^3^2", 2)(x, v) == doctest::Approx(512));
    CHECK_FALSE(Expr::parse("exp(x0)", 2).uses_v());
    try {
        Expr::parse("x0 + * 2", 2);
        FAIL("expected a parse error");
    } catch (const ParseError& err) {
        CHECK(err.position == 5);
    }
    CHECK_THROWS_AS(Expr::parse("x2", 2), ParseError);
    CHECK_THROWS_AS(Expr::parse("foo(x0)", 2), ParseError);
}

TEST_CASE("expression derivatives agree with the closed form") {
    ChartedSpace s;
    s.dim = 2;
    s.lagrangian = Expr::parse("0.5*exp(x0)*(v0^2 + v1^2)", 2).field();
    Vec x(2), v(2);
    x << 0.3, -0.1;
    v << 1.0, 2.0;
    Mat g = vertical_hessian(s, x, v);
    CHECK((g - std::exp(0.3) * Mat::Identity(2, 2)).norm() < 1e-13);
    auto d = derive(s, s.lagrangian, x, v, {{Partial::x, 0}, {Partial::x, 0}, {Partial::v, 1}});
    CHECK(d.value == doctest::Approx(std::exp(0.3) * 2.0));
}

TEST_CASE("scenario validation names the offending field") {
    json j = small_scenario();
    j["bogus"] = 1;
    try {
        parse_scenario(j);
        FAIL("expected ScenarioError");
    } catch (const ScenarioError& e) {
        CHECK(e.field == "$.bogus");
    }
    j = small_scenario();
    j["params"] = {{"N", "-inf"}, {"eps", 0}};
    CHECK_THROWS_AS(scenario_params(parse_scenario(j), build_space(parse_scenario(j))), Error);
    j = small_scenario();
    j["checks"][0]["name"] = "no_such_check";
    CHECK_THROWS_AS(parse_scenario(j), ScenarioError);
}

TEST_CASE("exit code precedence") {
    CHECK(combine_exit_codes({}) == exit_pass);
    CHECK(combine_exit_codes({outcome("pass"), outcome("fail")}) == exit_check_failed);
    CHECK(combine_exit_codes({outcome("fail"), outcome("hypothesis_rejected")}) == exit_hypothesis);
    CHECK(combine_exit_codes({outcome("numerical_error"), outcome("hypothesis_rejected"), outcome("fail")}) ==
          exit_numerical);
}

TEST_CASE("scenario run: report shape and determinism") {
    Scenario sc = parse_scenario(small_scenario());
    RunResult a = run_scenario(sc), b = run_scenario(sc);
    CHECK(a.exit_code == exit_pass);
    CHECK(dump(a.report) == dump(b.report));
    const auto& chk = a.report["checks"][0];
    CHECK(chk["status"] == "pass");
    CHECK(chk["report"]["verdict"] == "pass");
    CHECK(a.report["exit_code"] == 0);

    auto dir = std::filesystem::temp_directory_path() / "finslercomp_unit_run";
    std::filesystem::remove_all(dir);
    run_scenario(sc, RunOptions{dir.string(), std::nullopt, std::nullopt});
    CHECK(std::filesystem::exists(dir / "unit_sphere_conjugate.report.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("tolerance override flips a tight check") {
    Scenario sc = parse_scenario(small_scenario());
    RunResult r = run_scenario(sc, RunOptions{"", 1e-14, std::nullopt});
    CHECK(r.exit_code == exit_check_failed);
}

TEST_CASE("property: shortest float representation round-trips") {
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        double v = std::ldexp(rng.uniform(-1, 1), int(rng.uniform(-60, 60)));
        CHECK(std::stod(shortest_repr(v)) == v);
    }
    CHECK(shortest_repr(0.1) == "0.1");
    CHECK(number_json(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(number_json(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(number_json(std::nan("")) == "nan");
}

TEST_CASE("csv tables") {
    std::string t = csv_table({"t", "y"}, {{0.0, 0.5}, {1.0, 2.0}});
    CHECK(t == "t,y\n0,1\n0.5,2\n");
}

TEST_CASE("every bundled scenario parses") {
    int count = 0;
    for (const auto& e : std::filesystem::directory_iterator(FINSLERCOMP_SOURCE_DIR "/scenarios")) {
        if (e.path().extension() != ".json") continue;
        INFO(e.path().string());
        CHECK_NOTHROW(load_scenario(e.path().string()));
        ++count;
    }
    CHECK(count >= 50);
}

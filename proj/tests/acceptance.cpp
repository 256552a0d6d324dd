// Acceptance driver: runs the bundled scenario suite and prints one PASS/FAIL
// line per criterion. Usage: finslercomp_acceptance <scenario dir> <work dir>
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "finslercomp/runner.hpp"

using namespace finslercomp;
namespace fs = std::filesystem;

namespace {

struct Loaded {
    std::string file;
    Scenario sc;
    RunResult run;
};

// A tolerance option a check must not loosen beyond its pinned value.
struct Pin {
    std::string key;  // "tol" for the check tolerance, else an option name
    double fallback;  // runner default when the option is absent
    double limit;
};

struct Criterion {
    int id;
    std::string title;
    std::vector<std::string> prefixes;  // scenario ids
    std::string check;                  // restrict to one check name (empty: all)
    std::map<std::string, std::vector<Pin>> pins;  // by check name
};

double option(const CheckSpec& c, const Pin& p) {
    if (p.key == "tol") return c.tol.value_or(p.fallback);
    return c.options.contains(p.key) ? c.options[p.key].get<double>() : p.fallback;
}

bool starts_with(const std::string& s, const std::string& p) { return s.compare(0, p.size(), p) == 0; }

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Loaded> run_suite(const std::vector<fs::path>& files, const fs::path& out) {
    fs::remove_all(out);
    fs::create_directories(out);
    std::vector<Loaded> all;
    for (const auto& f : files) {
        Loaded l{f.filename().string(), load_scenario(f.string()), {}};
        l.run = run_scenario(l.sc, RunOptions{out.string(), std::nullopt, std::nullopt});
        all.push_back(std::move(l));
    }
    return all;
}

// Names of files whose bytes differ between two output trees (or exist in one only).
std::vector<std::string> tree_diff(const fs::path& a, const fs::path& b, std::size_t* compared) {
    std::set<std::string> names;
    for (const auto& d : {a, b})
        for (const auto& e : fs::directory_iterator(d)) names.insert(e.path().filename().string());
    std::vector<std::string> diff;
    for (const auto& n : names) {
        if (!fs::exists(a / n) || !fs::exists(b / n) || read_file(a / n) != read_file(b / n)) diff.push_back(n);
    }
    *compared = names.size();
    return diff;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: finslercomp_acceptance <scenario dir> <work dir>\n";
        return 2;
    }
    fs::path dir = argv[1], work = argv[2];
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    auto t0 = std::chrono::steady_clock::now();
    std::vector<Loaded> suite = run_suite(files, work / "run1");
    double first_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::vector<Pin> bounded_1e3{{"tol", 1e-3, 1e-3}};
    std::vector<Criterion> criteria = {
        {1, "structure validation on all built-in spaces", {"space_"}, "structure",
         {{"structure", {{"tol", 1e-8, 1e-8}}}}},
        {2, "flatness and curvature oracles", {"space_"}, "curvature_identities",
         {{"curvature_identities", {{"tol", 1e-6, 1e-5}}}}},
        {3, "matrix identities along geodesics", {"matrix_lemma_"}, "",
         {{"matrix_lemma", {{"tol", 1e-4, 1e-4}, {"gauss_tol", 1e-6, 1e-6}}}}},
        {4, "conjugate points", {"conjugate_"}, "", {{"conjugate_points", bounded_1e3}}},
        {5, "Bishop inequality", {"bishop_"}, "", {{"bishop", bounded_1e3}}},
        {6, "Bonnet-Myers bounds", {"bonnet_myers_"}, "", {{"bonnet_myers", bounded_1e3}}},
        {7, "Laplacian and d'Alembertian comparison", {"laplacian_"}, "", {{"laplacian", bounded_1e3}}},
        {8, "Bishop-Gromov and SCLV volume ratios", {"volume_"}, "",
         {{"bishop_gromov", bounded_1e3}, {"sclv", bounded_1e3}}},
        {9, "Legendre transform suite", {"legendre_"}, "",
         {{"legendre",
           {{"roundtrip_tol", 1e-8, 1e-8}, {"cauchy_schwarz_tol", 1e-10, 1e-10}, {"closed_form_tol", 1e-12, 1e-12}}}}},
        {10, "Raychaudhuri inequality and weighted Riccati equation", {"raychaudhuri_"}, "",
         {{"raychaudhuri", {{"tol", 1e-3, 1e-3}, {"riccati_tol", 1e-4, 1e-4}}}}},
        {11, "weighted Ricci monotonicity chain", {"monotonicity_gaussian"}, "", {}},
    };

    int failed = 0;
    for (const auto& cr : criteria) {
        std::vector<std::string> problems;
        int checks = 0;
        std::set<std::string> spaces;
        int geodesics = 0;
        for (const auto& l : suite) {
            bool selected = std::any_of(cr.prefixes.begin(), cr.prefixes.end(),
                                        [&](const std::string& p) { return starts_with(l.sc.id, p); });
            if (!selected) continue;
            for (std::size_t i = 0; i < l.sc.checks.size(); ++i) {
                const CheckSpec& spec = l.sc.checks[i];
                if (!cr.check.empty() && spec.name != cr.check) continue;
                const CheckOutcome& o = l.run.outcomes[i];
                ++checks;
                spaces.insert(l.sc.space.zoo.empty() ? "expression" : l.sc.space.zoo);
                if (o.status != "pass") {
                    std::string why = l.sc.id + "/" + spec.name + " " + o.status;
                    if (!o.error.empty()) why += " (" + o.error + ")";
                    else why += " (max violation " + fmt(o.report.max_violation) + ", tolerance " +
                                fmt(o.report.tolerance) + ")";
                    problems.push_back(why);
                    for (const auto& n : o.report.notes) problems.push_back("  note: " + n);
                }
                auto pins = cr.pins.find(spec.name);
                if (pins != cr.pins.end())
                    for (const auto& p : pins->second)
                        if (option(spec, p) > p.limit)
                            problems.push_back(l.sc.id + "/" + spec.name + " " + p.key + " " + fmt(option(spec, p)) +
                                               " looser than " + fmt(p.limit));
                if (cr.id == 1 && spec.options.value("samples", 0) < 200)
                    problems.push_back(l.sc.id + ": fewer than 200 samples");
                if ((cr.id == 9 && spec.options.value("samples", 0) < 1000) ||
                    (cr.id == 11 && spec.options.value("samples", 0) < 500))
                    problems.push_back(l.sc.id + ": sample count below the required minimum");
                if (cr.id == 3) {
                    ChartedSpace s = build_space(l.sc);
                    geodesics += int(bundle_directions(l.sc, s).size());
                }
            }
        }
        if (checks == 0) problems.push_back("no checks selected");
        if (cr.id == 1 && spaces.size() < 9)
            problems.push_back("only " + std::to_string(spaces.size()) + " of 9 built-in spaces covered");
        if (cr.id == 3 && geodesics < 20) problems.push_back("only " + std::to_string(geodesics) + " geodesics");

        bool ok = problems.empty();
        failed += !ok;
        std::cout << "criterion " << cr.id << ": " << (ok ? "PASS" : "FAIL") << " | " << cr.title << " | " << checks
                  << " checks";
        if (cr.id == 1) std::cout << ", " << spaces.size() << " spaces";
        if (cr.id == 3) std::cout << ", " << geodesics << " geodesics";
        std::cout << "\n";
        for (const auto& p : problems) std::cout << "    " << p << "\n";
    }

    // Criterion 12: a second run must reproduce every report and CSV byte for byte.
    std::vector<Loaded> again = run_suite(files, work / "run2");
    std::size_t compared = 0;
    auto diff = tree_diff(work / "run1", work / "run2", &compared);
    bool ok12 = diff.empty() && compared > 0 && first_seconds <= 600.0;
    failed += !ok12;
    std::cout << "criterion 12: " << (ok12 ? "PASS" : "FAIL") << " | end-to-end determinism and wall time | "
              << compared << " files compared, " << diff.size() << " differ, suite of " << files.size()
              << " scenarios ran in " << fmt(first_seconds) << " s (limit 600 s)\n";
    for (const auto& d : diff) std::cout << "    differs: " << d << "\n";

    std::cout << "suite exit codes:";
    for (const auto& l : suite)
        if (l.run.exit_code != exit_pass) std::cout << " " << l.sc.id << "=" << l.run.exit_code;
    std::cout << "\n" << (12 - failed) << " of 12 criteria pass\n";
    return failed == 0 ? 0 : 1;
}

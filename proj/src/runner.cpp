#include "finslercomp/runner.hpp"

#include <filesystem>

#include "finslercomp/comparison.hpp"
#include "finslercomp/expr.hpp"
#include "finslercomp/lorentz.hpp"
#include "finslercomp/util.hpp"

namespace finslercomp {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Ctx {
    const Scenario& sc;
    ChartedSpace s;
    ComparisonParams p;
    Vec origin;
    std::vector<Ray> rays;
    std::uint64_t seed;
    const CheckSpec& spec;
    std::optional<double> tol_override;
    std::vector<std::pair<std::string, std::string>>* csv;

    double tol(double def) const { return tol_override ? *tol_override : spec.tol ? *spec.tol : def; }
    double num(const char* key, double def) const {
        if (!spec.options.contains(key)) return def;
        const auto& v = spec.options.at(key);
        if (!v.is_number()) throw ScenarioError("check " + spec.name + "." + key, "expected a number");
        return v.get<double>();
    }
    bool flag(const char* key, bool def = false) const { return spec.options.value(key, def); }
    bool has(const char* key) const { return spec.options.contains(key); }
    Vec vec(const char* key) const {
        auto v = spec.options.at(key).get<std::vector<double>>();
        if (int(v.size()) != s.dim) throw ScenarioError(std::string("check ") + spec.name + "." + key, "wrong dimension");
        return Eigen::Map<const Vec>(v.data(), Eigen::Index(v.size()));
    }
    bool lorentzian() const { return s.signature == Signature::lorentzian; }
};

ExtN json_N(const json& j) {
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s == "inf") return ExtN::inf();
        if (s == "-inf") return ExtN::of(-kInf);
        throw ScenarioError("N", "expected a number or \"inf\"");
    }
    return ExtN::of(j.get<double>());
}

// (N, eps) pairs from the check's "grid" option, or the scenario params.
std::vector<ComparisonParams> param_grid(const Ctx& c) {
    if (!c.has("grid")) return {c.p};
    std::vector<ComparisonParams> out;
    for (const auto& e : c.spec.options.at("grid")) {
        if (!e.is_array() || e.size() != 2) throw ScenarioError("check " + c.spec.name + ".grid", "expected [N, eps] pairs");
        out.push_back(make_params(c.s.dim, c.s.signature, json_N(e[0]), e[1].get<double>(), c.p.K, c.p.a, c.p.b));
    }
    return out;
}

std::string tag(std::size_t i) { return "[" + std::to_string(i) + "]"; }

// Folds sub-report verdicts into one report with one residual per entry.
void absorb(CheckReport& into, const CheckReport& sub, double key, const std::string& label) {
    into.add(key, sub.max_violation);
    into.values["max_violation" + label] = sub.max_violation;
    for (const auto& n : sub.notes) into.notes.push_back(label + " " + n);
}

CheckReport check_structure(Ctx& c) {
    HomogeneityOptions ho;
    ho.tolerance = c.tol(1e-8);
    return validate_homogeneity(c.s, int(c.num("samples", 200)), c.seed, ho);
}

CheckReport check_curvature_identities(Ctx& c) {
    int count = int(c.num("samples", 50));
    auto samples = sample_admissible(c.s, count, c.seed);
    bool oracle = c.has("ricci_per_F2");
    double expected = c.num("ricci_per_F2", 0.0);
    CheckReport rep;
    rep.name = "curvature_identities";
    rep.tolerance = c.tol(1e-6);
    std::vector<double> r_vv(count), r_g(count), r_sym(count), r_hom(count), r_or(count);
    Rng rng(c.seed ^ 0x51ed2701ULL);
    std::vector<Vec> w1(count), w2(count);
    for (int i = 0; i < count; ++i) {
        w1[i] = Vec(c.s.dim);
        w2[i] = Vec(c.s.dim);
        for (int k = 0; k < c.s.dim; ++k) {
            w1[i][k] = rng.normal();
            w2[i][k] = rng.normal();
        }
    }
    parallel_for(count, [&](int i) {
        const auto& [x, v] = samples[i];
        CurvaturePack cp = curvature_pack(c.s, x, v);
        double scale = std::max(1.0, cp.R.cwiseAbs().maxCoeff() * v.squaredNorm());
        r_vv[i] = (cp.R * v).norm() / scale;
        r_g[i] = std::abs(v.dot(cp.g * cp.R * w1[i])) / (scale * std::max(1.0, cp.g.norm() * w1[i].norm()));
        double a = w2[i].dot(cp.g * cp.R * w1[i]), b = w1[i].dot(cp.g * cp.R * w2[i]);
        r_sym[i] = std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
        double ric = cp.R.trace();
        double ric2 = ricci_scalar(c.s, x, Vec(2.0 * v));
        r_hom[i] = std::abs(ric2 - 4.0 * ric) / std::max(1.0, 4.0 * std::abs(ric));
        if (oracle) {
            double F2 = 2.0 * std::abs(c.s.L(x, v));
            r_or[i] = std::abs(ric - expected * F2) / std::max(1.0, std::abs(expected * F2));
        }
    });
    double m1 = 0, m2 = 0, m3 = 0, m4 = 0, m5 = 0;
    for (int i = 0; i < count; ++i) {
        double worst = std::max({r_vv[i], r_g[i], r_sym[i], r_hom[i], oracle ? r_or[i] : 0.0});
        rep.add(double(i), worst);
        m1 = std::max(m1, r_vv[i]);
        m2 = std::max(m2, r_g[i]);
        m3 = std::max(m3, r_sym[i]);
        m4 = std::max(m4, r_hom[i]);
        m5 = std::max(m5, r_or[i]);
    }
    rep.values["R_v_v"] = m1;
    rep.values["g_v_R"] = m2;
    rep.values["symmetry"] = m3;
    rep.values["ricci_homogeneity"] = m4;
    if (oracle) rep.values["ricci_oracle"] = m5;
    if (c.has("flag_expected")) {
        Vec x = c.has("flag_point") ? c.vec("flag_point") : c.origin;
        double k = flag_curvature(c.s, x, c.vec("flag_v"), c.vec("flag_w"));
        double e = c.num("flag_expected", 0.0);
        rep.values["flag"] = k;
        rep.values["flag_expected"] = e;
        rep.add(-1.0, std::abs(k - e) / std::max(1.0, std::abs(e)));
    }
    rep.finalize();
    return rep;
}

CheckReport check_conjugate(Ctx& c) {
    CheckReport rep;
    rep.name = "conjugate_points";
    rep.tolerance = c.tol(1e-3);
    bool has_exp = c.has("expected");
    bool expect_none = has_exp && c.spec.options.at("expected").is_null();
    double expected = has_exp && !expect_none ? c.num("expected", 0.0) : kNaN;
    TransverseOptions to;
    to.grid_intervals = int(c.num("intervals", 256));
    std::vector<TransverseData> tds(c.rays.size());
    parallel_for(int(c.rays.size()), [&](int i) {
        tds[i] = transverse_data(c.s, c.rays[i].x0, c.rays[i].v0, c.sc.bundle.horizon, to);
    });
    for (std::size_t i = 0; i < tds.size(); ++i) {
        const auto& td = tds[i];
        double t0 = td.singular_t ? *td.singular_t : kNaN;
        rep.values["t0" + tag(i)] = t0;
        rep.values["t_reached" + tag(i)] = td.path.t.back();
        if (!td.path.completed) rep.notes.push_back("ray " + std::to_string(i) + " stopped: " + td.path.stop_reason);
        double res = 0.0;
        // "none up to the horizon" needs the ray to reach the horizon
        if (expect_none) res = td.singular_t || !td.path.completed ? kInf : 0.0;
        else if (has_exp) res = td.singular_t ? std::abs(t0 - expected) : kInf;
        rep.add(double(i), res);
        if (c.csv) c.csv->push_back({"ray" + std::to_string(i) + ".transverse", transverse_csv(td)});
    }
    if (has_exp) rep.values["expected"] = expect_none ? kInf : expected;
    rep.finalize();
    return rep;
}

CheckReport check_matrix_lemma(Ctx& c) {
    CheckReport rep;
    rep.name = "matrix_lemma";
    double tol = c.tol(1e-4), gauss_tol = c.num("gauss_tol", 1e-6);
    rep.tolerance = 1.0;
    TransverseOptions to;
    to.grid_intervals = int(c.num("intervals", 256));
    std::vector<MatrixLemmaResiduals> res(c.rays.size());
    parallel_for(int(c.rays.size()), [&](int i) {
        auto td = transverse_data(c.s, c.rays[i].x0, c.rays[i].v0, c.sc.bundle.horizon, to);
        res[i] = matrix_lemma_residuals(c.s, td);
    });
    for (std::size_t i = 0; i < res.size(); ++i) {
        const auto& r = res[i];
        rep.values["commutator" + tag(i)] = r.commutator;
        rep.values["first" + tag(i)] = r.first;
        rep.values["second" + tag(i)] = r.second;
        rep.values["gauss" + tag(i)] = r.gauss;
        double worst = std::max({r.commutator, r.first, r.second}) / tol;
        rep.add(double(i), r.nodes > 0 ? std::max(worst, r.gauss / gauss_tol) : kNaN);
    }
    rep.values["tol"] = tol;
    rep.values["gauss_tol"] = gauss_tol;
    rep.notes.push_back("residuals are multiples of their tolerances");
    rep.finalize();
    return rep;
}

CheckReport check_bishop_all(Ctx& c) {
    CheckReport rep;
    rep.name = "bishop";
    rep.params = report_params(c.p);
    CheckOptions co;
    co.tol = c.tol(1e-3);
    co.transverse.grid_intervals = int(c.num("intervals", 256));
    rep.tolerance = co.tol;
    bool equality = c.flag("equality");
    auto grid = param_grid(c);
    std::size_t idx = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::vector<BishopProfile> profs(c.rays.size());
        parallel_for(int(c.rays.size()), [&](int i) {
            profs[i] = bishop_profile(c.s, c.rays[i], c.sc.bundle.horizon, grid[g], co.transverse);
        });
        for (std::size_t i = 0; i < profs.size(); ++i, ++idx) {
            CheckReport sub = check_bishop(profs[i], co);
            std::string label = "[N=" + grid[g].N.str() + ",eps=" + shortest_repr(grid[g].eps) + ",ray=" +
                                std::to_string(i) + "]";
            if (equality) sub.max_violation = std::max(sub.max_violation, sub.values["max_abs_residual"]);
            absorb(rep, sub, double(idx), label);
            rep.values["small_tau_slope" + label] = sub.values["small_tau_slope"];
            rep.values["expected_slope" + label] = sub.values["expected_slope"];
            if (c.csv && g == 0) {
                const auto& pr = profs[i];
                c.csv->push_back({"ray" + std::to_string(i) + ".bishop",
                                  csv_table({"tau", "h1", "dh1", "ddh1", "ricci_N"},
                                            {pr.tau, pr.h1, pr.dh1, pr.ddh1, pr.ricci_N})});
                c.csv->push_back({"ray" + std::to_string(i) + ".weight", weight_csv(pr.weight)});
            }
        }
    }
    if (equality) rep.notes.push_back("equality case: residuals are two-sided");
    rep.finalize();
    return rep;
}

CheckReport check_bonnet_myers_any(Ctx& c) {
    CheckOptions co;
    co.tol = c.tol(1e-3);
    co.transverse.grid_intervals = int(c.num("intervals", 256));
    CheckReport rep = c.lorentzian() ? check_spacetime_bonnet_myers(c.s, c.p, c.rays, c.sc.bundle.horizon, co)
                                     : check_bonnet_myers(c.s, c.p, c.rays, c.sc.bundle.horizon, co);
    if (c.has("expected_t0")) {
        double e = c.num("expected_t0", 0.0);
        for (std::size_t i = 0; i < c.rays.size(); ++i) {
            double t0 = rep.values["t0" + tag(i)];
            rep.add(double(2 * c.rays.size() + i), std::isnan(t0) ? kInf : std::abs(t0 - e));
        }
        rep.values["expected_t0"] = e;
    }
    rep.finalize();
    return rep;
}

CheckReport check_laplacian_any(Ctx& c) {
    CheckOptions co;
    co.tol = c.tol(1e-3);
    co.transverse.grid_intervals = int(c.num("intervals", 256));
    CheckReport rep = c.lorentzian() ? check_lorentz_laplacian(c.s, c.p, c.rays, c.sc.bundle.horizon, co)
                                     : check_laplacian_comparison(c.s, c.p, c.rays, c.sc.bundle.horizon, co);
    if (c.flag("equality")) {
        double gap = rep.values["max_abs_relative_gap"];
        rep.add(-1.0, gap);
        rep.notes.push_back("equality case: the relative gap to the bound is also checked");
    }
    rep.finalize();
    return rep;
}

QuadratureSpec quadrature(const Ctx& c) {
    QuadratureSpec q;
    q.angular = int(c.num("angular", 0));
    q.qmc_points = int(c.num("qmc_points", 128));
    q.qmc_replicas = int(c.num("qmc_replicas", 4));
    q.radial_intervals = int(c.num("radial_intervals", 64));
    q.seed = c.seed;
    q.tol = c.num("quadrature_tol", 0.0);
    return q;
}

void expected_ratio(Ctx& c, CheckReport& rep) {
    if (!c.has("expected_ratio")) return;
    double e = c.num("expected_ratio", 0.0);
    rep.add(-1.0, std::abs(rep.values["ratio"] - e) / std::max(1.0, e));
    rep.values["expected_ratio"] = e;
    rep.finalize();
}

CheckReport check_bishop_gromov_any(Ctx& c) {
    if (c.lorentzian()) throw Error("bishop_gromov: use the sclv check for lorentzian spaces");
    CheckReport rep = check_bishop_gromov(c.s, c.p, c.origin, c.num("r", 0.5), c.num("R", 1.0), quadrature(c),
                                          c.tol(1e-3));
    expected_ratio(c, rep);
    return rep;
}

CheckReport check_sclv(Ctx& c) {
    if (!c.lorentzian()) throw Error("sclv: lorentzian spaces only");
    SectorSpec sec;
    const json& o = c.spec.options;
    if (o.contains("sector")) {
        const json& s = o.at("sector");
        if (s.contains("axis")) {
            auto a = s.at("axis").get<std::vector<double>>();
            sec.axis = Eigen::Map<const Vec>(a.data(), Eigen::Index(a.size()));
        }
        sec.rapidity = s.value("rapidity", 0.5);
        sec.T = s.value("T", 1.0);
        if (s.contains("cut_table")) sec.cut_table = s.at("cut_table").get<std::vector<double>>();
    }
    if (sec.axis.size() == 0) sec.axis = c.s.time_orientation ? c.s.time_orientation(c.origin) : Vec::Unit(c.s.dim, 0);
    CheckReport rep = sclv_volume_check(c.s, c.p, c.origin, sec, c.num("r", 0.5), c.num("R", 1.0), quadrature(c),
                                        c.tol(1e-3));
    expected_ratio(c, rep);
    return rep;
}

CheckReport check_monotonicity(Ctx& c) {
    int n = weighted_dimension(c.s.dim, c.s.signature);
    std::vector<ExtN> Ns;
    if (c.has("N_list")) {
        for (const auto& e : c.spec.options.at("N_list")) Ns.push_back(json_N(e));
    } else if (c.lorentzian()) {
        Ns = {ExtN::of(n), ExtN::of(n + 2), ExtN::inf(), ExtN::of(-1), ExtN::of(0)};
    } else {
        Ns = {ExtN::of(n), ExtN::of(n + 2), ExtN::inf(), ExtN::of(0), ExtN::of(1)};
    }
    auto raw = sample_admissible(c.s, int(c.num("samples", 500)), c.seed);
    std::vector<std::pair<Vec, Vec>> samples;
    for (auto& s : raw) samples.emplace_back(s.x, s.v);
    CheckReport rep = monotonicity_check(c.s, samples, Ns);
    if (c.spec.tol || c.tol_override) rep.tolerance = c.tol(rep.tolerance);
    rep.finalize();
    return rep;
}

CheckReport check_raychaudhuri_all(Ctx& c) {
    if (!c.lorentzian()) throw Error("raychaudhuri: lorentzian spaces only");
    CheckReport rep;
    rep.name = "raychaudhuri";
    rep.params = report_params(c.p);
    CheckOptions co;
    co.tol = c.tol(1e-3);
    rep.tolerance = co.tol;
    double riccati_tol = c.num("riccati_tol", 1e-4);
    bool equality = c.flag("equality");
    TransverseOptions to;
    to.grid_intervals = int(c.num("intervals", 256));
    std::vector<LagrangeTensorData> base(c.rays.size());
    parallel_for(int(c.rays.size()), [&](int i) {
        base[i] = lagrange_tensor(c.s, c.rays[i], c.sc.bundle.horizon, c.p.eps, to);
    });
    auto grid = param_grid(c);
    std::size_t idx = 0;
    for (const auto& gp : grid) {
        for (std::size_t i = 0; i < base.size(); ++i, ++idx) {
            LagrangeTensorData d = gp.eps == base[i].eps ? base[i] : with_eps(base[i], gp.eps);
            std::string label = "[N=" + gp.N.str() + ",eps=" + shortest_repr(gp.eps) + ",ray=" + std::to_string(i) + "]";
            CheckReport sub = check_raychaudhuri(d, gp.N, co);
            if (equality) sub.max_violation = std::max(sub.max_violation, sub.values["max_abs_residual"]);
            absorb(rep, sub, double(idx), label);
            CheckReport ric = check_weighted_riccati(d, riccati_tol);
            rep.values["riccati_residual" + label] = ric.max_violation;
            // scale onto the Raychaudhuri tolerance so one verdict covers both
            rep.add(double(idx) + 0.5, ric.max_violation / riccati_tol * co.tol);
            rep.values["lagrange_residual" + label] = d.lagrange_residual;
            if (c.csv && &gp == &grid.front()) {
                std::vector<double> tt(d.t().begin(), d.t().begin() + d.valid), tau(d.weight.phi.begin(),
                                                                                     d.weight.phi.begin() + d.valid);
                c.csv->push_back({"ray" + std::to_string(i) + ".expansion",
                                  csv_table({"t", "tau", "theta", "theta_eps"}, {tt, tau, d.theta, d.theta_eps})});
            }
        }
    }
    rep.values["riccati_tol"] = riccati_tol;
    if (equality) rep.notes.push_back("equality case: residuals are two-sided");
    rep.notes.push_back("weighted Riccati residuals enter as residual * tol / riccati_tol");
    rep.finalize();
    return rep;
}

CheckReport check_legendre_suite(Ctx& c) {
    if (!c.lorentzian()) throw Error("legendre: lorentzian spaces only");
    int count = int(c.num("samples", 1000));
    double rt_tol = c.num("roundtrip_tol", 1e-8), cs_tol = c.num("cauchy_schwarz_tol", 1e-10);
    auto samples = sample_admissible(c.s, count, c.seed, c.num("x_box", 0.5));
    std::vector<double> rt(count), idr(count), cs(count);
    std::vector<char> polar(count, 1);
    parallel_for(count, [&](int i) {
        const Vec& x = samples[i].x;
        const Vec& v = samples[i].v;
        Vec w = legendre(c.s, x, v);
        LegendreInverseOptions lo;
        lo.check_polar = i % 10 == 0;  // the membership sweep is costly; every tenth sample
        if (lo.check_polar) polar[i] = polar_cone_test(c.s, x, w).member;
        Vec back = legendre_inverse(c.s, x, w, lo);
        rt[i] = (back - v).norm() / v.norm();
        double Ls = c.s.L(x, back);
        idr[i] = std::abs(Ls - 0.5 * w.dot(back)) / std::max(1.0, std::abs(Ls));
        // reverse Cauchy-Schwarz with the covector of the next sample's velocity
        const Vec& u = samples[(i + 1) % count].v;
        Vec om = legendre(c.s, x, u);
        double lhs = c.s.L(x, u) * c.s.L(x, v);  // L*(om) = L(u)
        double rhs = 0.25 * om.dot(v) * om.dot(v);
        cs[i] = (lhs - rhs) / std::max(1.0, rhs);
    });
    CheckReport rep;
    rep.name = "legendre";
    rep.tolerance = 1.0;
    double m_rt = 0, m_id = 0, m_cs = -kInf;
    int bad_polar = 0;
    for (int i = 0; i < count; ++i) {
        m_rt = std::max(m_rt, rt[i]);
        m_id = std::max(m_id, idr[i]);
        m_cs = std::max(m_cs, cs[i]);
        bad_polar += !polar[i];
        rep.add(double(i), std::max({rt[i] / rt_tol, idr[i] / rt_tol, cs[i] / cs_tol, polar[i] ? 0.0 : kInf}));
    }
    rep.values["roundtrip_max"] = m_rt;
    rep.values["dual_identity_max"] = m_id;
    rep.values["cauchy_schwarz_excess_max"] = m_cs;
    rep.values["polar_failures"] = bad_polar;
    if (c.flag("minkowski_closed_form")) {
        // covector of v is (-v0, v1, ..., vn)
        double worst = 0.0, cf_tol = c.num("closed_form_tol", 1e-12);
        for (int i = 0; i < count; ++i) {
            Vec v = samples[i].v, expect = v;
            expect[0] = -v[0];
            worst = std::max(worst, (legendre(c.s, samples[i].x, v) - expect).norm() / v.norm());
        }
        rep.values["closed_form_max"] = worst;
        rep.add(-2.0, worst / cf_tol);
    }
    if (c.has("pair_angle")) {
        // two vectors at angles a and pi - a (dim 2)
        double a = c.num("pair_angle", 0.0), r = c.num("pair_radius", 1.0);
        Vec v1(2), v2(2);
        v1 << r * std::cos(a), r * std::sin(a);
        v2 << r * std::cos(M_PI - a), r * std::sin(M_PI - a);
        Vec x = Vec::Zero(2);
        double gap = (legendre(c.s, x, v1) - legendre(c.s, x, v2)).norm();
        rep.values["pair_gap"] = gap;
        rep.add(-1.0, gap / rt_tol);
    }
    rep.notes.push_back("residuals are multiples of their tolerances");
    rep.finalize();
    return rep;
}

CheckReport check_hessian(Ctx& c) {
    if (!c.lorentzian()) throw Error("hessian_symmetry: lorentzian spaces only");
    std::string f = c.spec.options.value("f", std::string("x0"));
    Expr e = Expr::parse(f, c.s.dim, c.sc.space.constants);
    if (e.uses_v()) throw ScenarioError("check hessian_symmetry.f", "f must not depend on v");
    Vec x = c.has("point") ? c.vec("point") : c.origin;
    HessianOptions ho;
    ho.symmetry_tol = c.num("symmetry_tol", c.tol(1e-5));
    ho.gradient_tol = c.num("gradient_tol", 1e-7);
    return hessian_symmetry_check(c.s, e.field(), x, ho);
}

CheckReport dispatch(Ctx& c) {
    const std::string& n = c.spec.name;
    if (n == "structure") return check_structure(c);
    if (n == "curvature_identities") return check_curvature_identities(c);
    if (n == "conjugate_points") return check_conjugate(c);
    if (n == "matrix_lemma") return check_matrix_lemma(c);
    if (n == "bishop") return check_bishop_all(c);
    if (n == "bonnet_myers") return check_bonnet_myers_any(c);
    if (n == "laplacian") return check_laplacian_any(c);
    if (n == "bishop_gromov") return check_bishop_gromov_any(c);
    if (n == "sclv") return check_sclv(c);
    if (n == "monotonicity") return check_monotonicity(c);
    if (n == "raychaudhuri") return check_raychaudhuri_all(c);
    if (n == "legendre") return check_legendre_suite(c);
    if (n == "hessian_symmetry") return check_hessian(c);
    throw ScenarioError("check", "unknown check '" + n + "'");
}

}  // namespace

int combine_exit_codes(const std::vector<CheckOutcome>& outcomes) {
    bool num = false, hyp = false, fail = false;
    for (const auto& o : outcomes) {
        num |= o.status == "numerical_error";
        hyp |= o.status == "hypothesis_rejected";
        fail |= o.status == "fail";
    }
    return num ? exit_numerical : hyp ? exit_hypothesis : fail ? exit_check_failed : exit_pass;
}

CheckOutcome run_check(const Scenario& sc, const CheckSpec& check, const RunOptions& opt) {
    CheckOutcome out;
    out.name = check.name;
    try {
        ChartedSpace s = build_space(sc);
        Ctx c{sc, s, scenario_params(sc, s), Vec::Zero(s.dim), {}, opt.seed ? *opt.seed : sc.seed, check,
              opt.tol, &out.csv};
        if (!sc.bundle.origin.empty())
            c.origin = Eigen::Map<const Vec>(sc.bundle.origin.data(), Eigen::Index(sc.bundle.origin.size()));
        for (const Vec& d : bundle_directions(sc, s)) c.rays.push_back({c.origin, d});
        out.report = dispatch(c);
        out.report.name = check.name;
        out.report.scenario = sc.id;
        if (!out.report.params) out.report.params = report_params(c.p);
        out.status = out.report.pass ? "pass" : "fail";
    } catch (const HypothesisError& e) {
        out.status = "hypothesis_rejected";
        out.error = e.what();
    } catch (const ScenarioError& e) {
        out.status = "hypothesis_rejected";
        out.error = e.what();
    } catch (const std::exception& e) {
        out.status = "numerical_error";
        out.error = e.what();
    }
    if (out.status != "pass" && out.status != "fail") {
        out.report = CheckReport{};
        out.report.name = check.name;
        out.report.scenario = sc.id;
        out.report.pass = false;
        out.report.max_violation = kNaN;
    }
    return out;
}

RunResult run_scenario(const Scenario& sc, const RunOptions& opt) {
    RunResult res;
    for (const auto& chk : sc.checks) res.outcomes.push_back(run_check(sc, chk, opt));
    res.exit_code = combine_exit_codes(res.outcomes);

    ojson j = ojson::object();
    j["scenario"] = sc.id;
    j["space"] = sc.space.zoo.empty() ? "expression" : sc.space.zoo;
    j["seed"] = opt.seed ? *opt.seed : sc.seed;
    if (opt.tol) j["tolerance_override"] = number_json(*opt.tol);
    ojson checks = ojson::array();
    for (const auto& o : res.outcomes) {
        ojson cj = ojson::object();
        cj["name"] = o.name;
        cj["status"] = o.status;
        if (!o.error.empty()) cj["error"] = o.error;
        cj["report"] = report_json(o.report);
        checks.push_back(cj);
    }
    j["checks"] = checks;
    j["exit_code"] = res.exit_code;
    res.report = j;

    if (!opt.out_dir.empty()) {
        std::filesystem::create_directories(opt.out_dir);
        write_text_file((std::filesystem::path(opt.out_dir) / sc.report_name).string(), dump(j));
        for (const auto& o : res.outcomes)
            for (const auto& [suffix, text] : o.csv)
                write_text_file(
                    (std::filesystem::path(opt.out_dir) / (sc.id + "." + o.name + "." + suffix + ".csv")).string(),
                    text);
    }
    return res;
}

}  // namespace finslercomp

#include "finslercomp/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "finslercomp/detail/jets.hpp"
#include "finslercomp/util.hpp"

namespace finslercomp {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Build a nested dual whose level-l seed is seeds[l] (level 0 innermost).
template <class T>
T seeded(double val, const double* seeds, int depth) {
    if constexpr (std::is_same_v<T, double>) {
        (void)seeds; (void)depth;
        return val;
    } else {
        using Inner = decltype(T{}.a);
        return T(seeded<Inner>(val, seeds, depth - 1), Inner(seeds[depth - 1]));
    }
}

template <class T>
double top_component(const T& r) {
    if constexpr (std::is_same_v<T, double>) return r;
    else return top_component(r.b);
}

template <class T>
double dual_partial(const TMField& f, const Vec& x, const Vec& v, const std::vector<Partial>& ps) {
    int n = int(x.size());
    int k = int(ps.size());
    std::vector<T> X(n), V(n);
    double sx[4], sv[4];
    for (int i = 0; i < n; ++i) {
        for (int l = 0; l < k; ++l) {
            sx[l] = (ps[l].slot == Partial::x && ps[l].index == i) ? 1.0 : 0.0;
            sv[l] = (ps[l].slot == Partial::v && ps[l].index == i) ? 1.0 : 0.0;
        }
        X[i] = seeded<T>(x[i], sx, k);
        V[i] = seeded<T>(v[i], sv, k);
    }
    return top_component(f(X.data(), V.data()));
}

struct FdState {
    const ChartedSpace* s;
    const TMField* f;
    const std::vector<Partial>* ps;
    std::vector<double> steps;
    double fscale = 0.0;
};

double nested_cd(FdState& st, Vec& x, Vec& v, std::size_t level, double shrink) {
    if (level == st.ps->size()) {
        if (!st.s->in_domain(x)) throw DomainError("derivative stencil leaves the chart domain");
        double val = (*st.f)(x, v);
        st.fscale = std::max(st.fscale, std::abs(val));
        return val;
    }
    const Partial& p = (*st.ps)[level];
    Vec& tgt = p.slot == Partial::x ? x : v;
    double h = st.steps[level] * shrink;
    double keep = tgt[p.index];
    tgt[p.index] = keep + h;
    double fp = nested_cd(st, x, v, level + 1, shrink);
    tgt[p.index] = keep - h;
    double fm = nested_cd(st, x, v, level + 1, shrink);
    tgt[p.index] = keep;
    return (fp - fm) / (2.0 * h);
}

Derivative richardson_partial(const ChartedSpace& s, const TMField& f, const Vec& x0, const Vec& v0,
                              const std::vector<Partial>& ps) {
    FdState st{&s, &f, &ps, {}, 0.0};
    int k = int(ps.size());
    double base = std::pow(kEps, 1.0 / double(k + 2));
    for (const auto& p : ps) {
        double c = p.slot == Partial::x ? x0[p.index] : v0[p.index];
        st.steps.push_back(base * std::max(1.0, std::abs(c)));
    }
    Vec x = x0, v = v0;
    double d1 = nested_cd(st, x, v, 0, 1.0);
    double d2 = nested_cd(st, x, v, 0, 0.5);
    double d4 = nested_cd(st, x, v, 0, 0.25);
    double r_coarse = (4.0 * d2 - d1) / 3.0;
    double r_fine = (4.0 * d4 - d2) / 3.0;
    double hmin = 0.25;
    for (double h : st.steps) hmin = std::min(hmin, h * 0.25);
    double roundoff = 4.0 * kEps * std::max(1.0, st.fscale) / std::pow(hmin, k);
    return {r_fine, std::abs(r_fine - r_coarse) + roundoff};
}

}  // namespace

Derivative derive(const ChartedSpace& s, const TMField& field, const Vec& x, const Vec& v,
                  const std::vector<Partial>& partials, DiffMethod method, double tol) {
    int k = int(partials.size());
    if (k > 4) throw Error("derive: total order " + std::to_string(k) + " exceeds 4");
    if (x.size() != s.dim || v.size() != s.dim) throw Error("derive: dimension mismatch");
    for (const auto& p : partials)
        if (p.index < 0 || p.index >= s.dim) throw Error("derive: index out of range");
    if (!s.in_domain(x)) throw DomainError("derive: point outside chart domain");
    require_admissible(s, x, v);

    bool vertical_only = std::all_of(partials.begin(), partials.end(),
                                     [](const Partial& p) { return p.slot == Partial::v; });
    if (method == DiffMethod::automatic) method = (vertical_only && k <= 2) ? DiffMethod::dual : DiffMethod::richardson;

    Derivative d;
    if (method == DiffMethod::dual) {
        switch (k) {
            case 0: d.value = field(x, v); break;
            case 1: d.value = dual_partial<D1>(field, x, v, partials); break;
            case 2: d.value = dual_partial<D2>(field, x, v, partials); break;
            case 3: d.value = dual_partial<D3>(field, x, v, partials); break;
            default: d.value = dual_partial<D4>(field, x, v, partials); break;
        }
        d.error_estimate = 16.0 * kEps * std::max(1.0, std::abs(d.value));
    } else {
        d = k == 0 ? Derivative{field(x, v), 0.0} : richardson_partial(s, field, x, v, partials);
    }
    if (tol > 0.0 && !(d.error_estimate <= tol))
        throw NumericalError("derive: error estimate " + std::to_string(d.error_estimate) + " exceeds tolerance");
    return d;
}

double Tensor3::max_abs() const {
    double m = 0.0;
    for (double d : data) m = std::max(m, std::abs(d));
    return m;
}

int negative_eigenvalues(const Mat& g) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
    int neg = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] < 0.0) ++neg;
    return neg;
}

Mat vertical_hessian(const ChartedSpace& s, const Vec& x, const Vec& v) {
    int n = s.dim;
    auto g = detail::vertical_hessian<double>(s.lagrangian, n, x.data(), v.data());
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = g[i * n + j];
    return m;
}

MetricAtVector fundamental_tensor(const ChartedSpace& s, const Vec& x, const Vec& v) {
    if (!s.in_domain(x)) throw DomainError("fundamental_tensor: point outside chart domain");
    require_admissible(s, x, v);
    Mat g = vertical_hessian(s, x, v);
    double scale = std::max(1e-300, g.cwiseAbs().maxCoeff());
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw NumericalError("fundamental_tensor: matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    int neg = 0;
    double amin = std::numeric_limits<double>::infinity(), amax = 0.0;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev[i] < 0.0) ++neg;
        amin = std::min(amin, std::abs(ev[i]));
        amax = std::max(amax, std::abs(ev[i]));
    }
    int want = s.signature == Signature::positive ? 0 : 1;
    if (neg != want)
        throw DomainError("fundamental_tensor: signature mismatch (" + std::to_string(neg) +
                          " negative eigenvalues, expected " + std::to_string(want) + ")");
    if (!(amin > 1e-12 * amax)) throw NumericalError("fundamental_tensor: degenerate matrix");
    return {g, x, v};
}

Tensor3 cartan_tensor(const ChartedSpace& s, const Vec& x, const Vec& v) {
    if (!s.in_domain(x)) throw DomainError("cartan_tensor: point outside chart domain");
    require_admissible(s, x, v);
    int n = s.dim;
    Tensor3 C(n);
    std::vector<Partial> ps(3);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (int k = j; k < n; ++k) {
                ps[0] = {Partial::v, i};
                ps[1] = {Partial::v, j};
                ps[2] = {Partial::v, k};
                double c = 0.5 * dual_partial<D3>(s.lagrangian, x, v, ps);
                int idx[3] = {i, j, k};
                std::sort(idx, idx + 3);
                do {
                    C(idx[0], idx[1], idx[2]) = c;
                } while (std::next_permutation(idx, idx + 3));
            }
    return C;
}

double inner_product(const MetricAtVector& g, const Vec& w1, const Vec& w2) {
    if (w1.size() != g.matrix.rows() || w2.size() != g.matrix.rows())
        throw Error("inner_product: dimension mismatch");
    return w1.dot(g.matrix * w2);
}

double inner_product(const MetricAtVector& g, const TangentVector& w1, const TangentVector& w2) {
    auto same = [&](const Vec& b) { return b.size() == g.x.size() && (b - g.x).cwiseAbs().maxCoeff() == 0.0; };
    if (!same(w1.base) || !same(w2.base)) throw Error("inner_product: mismatched base points");
    return inner_product(g, w1.coords, w2.coords);
}

double finsler_norm(const ChartedSpace& s, const Vec& x, const Vec& v) {
    if (!s.in_domain(x)) throw DomainError("finsler_norm: point outside chart domain");
    double L = s.L(x, v);
    if (s.signature == Signature::positive) {
        if (!(L > 0.0)) throw DomainError("finsler_norm: L must be positive for a positive-definite space");
        return std::sqrt(2.0 * L);
    }
    if (!(L < 0.0)) throw DomainError("finsler_norm: L must be negative (timelike) in a lorentzian space");
    return std::sqrt(-2.0 * L);
}

bool is_admissible(const ChartedSpace& s, const Vec& x, const Vec& v) {
    try {
        require_admissible(s, x, v);
        return true;
    } catch (const DomainError&) {
        return false;
    }
}

void require_admissible(const ChartedSpace& s, const Vec& x, const Vec& v) {
    if (v.size() != s.dim || x.size() != s.dim) throw DomainError("vector has wrong dimension");
    if (!v.allFinite() || !x.allFinite()) throw DomainError("non-finite coordinates");
    double n2 = v.squaredNorm();
    if (n2 == 0.0) throw DomainError("zero vector is not admissible");
    if (s.signature == Signature::lorentzian) {
        double L = s.L(x, v);
        if (!(L <= -s.cone_margin * n2)) throw DomainError("vector is not timelike with the required cone margin");
    }
}

Vec angular_sweep(const Vec& from, const Vec& to, double frac) {
    Vec a = from.normalized(), b = to.normalized();
    double c = std::clamp(a.dot(b), -1.0, 1.0);
    Vec perp = b - c * a;
    double pn = perp.norm();
    if (pn < 1e-14) {
        if (c > 0.0) return a;
        throw DomainError("angular_sweep: antipodal directions");
    }
    double phi = frac * std::acos(c);
    return std::cos(phi) * a + std::sin(phi) * (perp / pn);
}

bool future_directed(const ChartedSpace& s, const Vec& x, const Vec& v) {
    if (s.signature != Signature::lorentzian) return false;
    Vec X = s.time_orientation ? s.time_orientation(x) : Vec::Unit(s.dim, 0);
    // Timelike cone components are convex, so v lies in the component of X
    // iff the segment from X to v stays timelike. Its directions are swept at
    // constant angle: a parameter march can jump across a thin gap near the
    // origin when v is almost opposite to X (several components for Beem).
    if (X.normalized().dot(v.normalized()) < -1.0 + 1e-12) return false;
    constexpr int kSteps = 256;
    for (int k = 0; k < kSteps; ++k) {
        Vec w = angular_sweep(X, v, double(k) / kSteps);
        if (!(s.L(x, w) < 0.0)) return false;
    }
    return true;
}

std::vector<Sample> sample_admissible(const ChartedSpace& s, int count, std::uint64_t seed, double x_box) {
    Rng rng(seed);
    std::vector<Sample> out;
    out.reserve(count);
    int n = s.dim;
    long guard = 0;
    while (int(out.size()) < count) {
        if (++guard > 1000L * count + 100000) throw Error("sample_admissible: could not find admissible samples");
        Vec x(n), v(n);
        for (int i = 0; i < n; ++i) x[i] = rng.uniform(-x_box, x_box);
        if (!s.in_domain(x)) continue;
        if (s.signature == Signature::positive) {
            for (int i = 0; i < n; ++i) v[i] = rng.normal();
            if (v.norm() < 1e-3) continue;
        } else {
            Vec X = s.time_orientation ? s.time_orientation(x) : Vec::Unit(n, 0);
            double spread = rng.uniform(0.0, 1.5);
            for (int i = 0; i < n; ++i) v[i] = X[i] + spread * rng.normal() / std::sqrt(double(n));
            v *= rng.uniform(0.3, 3.0);
            // stay clearly inside the cone so derivatives are well conditioned
            if (!(s.L(x, v) <= -1e-2 * v.squaredNorm())) continue;
            if (!future_directed(s, x, v)) continue;
        }
        if (!is_admissible(s, x, v)) continue;
        out.push_back({x, v});
    }
    return out;
}

CheckReport validate_homogeneity(const ChartedSpace& s, int sample_count, std::uint64_t rng_seed,
                                 const HomogeneityOptions& opt) {
    CheckReport rep;
    rep.name = "homogeneity";
    rep.scenario = s.name;
    rep.tolerance = opt.tolerance;
    auto samples = sample_admissible(s, sample_count, rng_seed, opt.x_box);
    Rng rng(rng_seed ^ 0x9e3779b97f4a7c15ULL);
    double m_L = 0, m_g = 0, m_C = 0, m_E = 0, m_sig = 0, m_psi = 0;
    int want = s.signature == Signature::positive ? 0 : 1;
    for (int i = 0; i < int(samples.size()); ++i) {
        const auto& [x, v] = samples[i];
        double c = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
        Vec cv = c * v;
        double L = s.L(x, v), Lc = s.L(x, cv);
        double rL = std::abs(Lc - c * c * L) / std::max(1.0, std::abs(c * c * L));
        Mat g = vertical_hessian(s, x, v), gc = vertical_hessian(s, x, cv);
        double gs = std::max(1.0, g.cwiseAbs().maxCoeff());
        double rg = (gc - g).cwiseAbs().maxCoeff() / gs;
        Tensor3 C = cartan_tensor(s, x, v);
        double rc = 0.0;
        for (int a = 0; a < s.dim; ++a)
            for (int b = 0; b < s.dim; ++b) {
                double acc = 0.0;
                for (int k = 0; k < s.dim; ++k) acc += C(a, b, k) * v[k];
                rc = std::max(rc, std::abs(acc));
            }
        rc /= std::max(1.0, C.max_abs() * v.norm());
        double rE = std::abs(v.dot(g * v) - 2.0 * L) / std::max(1.0, std::abs(L));
        double rs = negative_eigenvalues(g) == want ? 0.0 : 1.0;
        double rp = 0.0;
        if (s.weight) rp = std::abs(s.psi(x, cv) - s.psi(x, v)) / std::max(1.0, std::abs(s.psi(x, v)));
        m_L = std::max(m_L, rL);
        m_g = std::max(m_g, rg);
        m_C = std::max(m_C, rc);
        m_E = std::max(m_E, rE);
        m_sig = std::max(m_sig, rs);
        m_psi = std::max(m_psi, rp);
        rep.add(double(i), std::max({rL, rg, rc, rE, rs, rp}));
    }
    rep.values["lagrangian_scaling"] = m_L;
    rep.values["metric_scaling"] = m_g;
    rep.values["cartan_contraction"] = m_C;
    rep.values["euler_identity"] = m_E;
    rep.values["signature_failures"] = m_sig;
    rep.values["weight_scaling"] = m_psi;
    if (m_L > opt.tolerance) rep.notes.push_back("2-homogeneity of L fails");
    rep.finalize();
    return rep;
}

}  // namespace finslercomp

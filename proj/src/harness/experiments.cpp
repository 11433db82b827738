#include "santalo/geometry.hpp"
#include "santalo/harness.hpp"
#include "santalo/linearize.hpp"
#include "santalo/measures.hpp"
#include "santalo/rng.hpp"
#include "santalo/santalo.hpp"
#include "santalo/sconcave.hpp"
#include "santalo/sphere.hpp"
#include "santalo/transport.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace santalo::harness {

namespace {

using json = nlohmann::json;
using geometry::ConvexBody;
using measures::GridMeasure;
using measures::WeightFunction;
using sconcave::GridFunction;
using sconcave::GridSpec;

// ---- parameter access (types are validated against the defaults) ----

double num(const json& p, const char* k) { return p.at(k).get<double>(); }
int integer(const json& p, const char* k) { return p.at(k).get<int>(); }
std::vector<double> nums(const json& p, const char* k) { return p.at(k).get<std::vector<double>>(); }
std::vector<int> ints(const json& p, const char* k) { return p.at(k).get<std::vector<int>>(); }
std::vector<std::string> strs(const json& p, const char* k) { return p.at(k).get<std::vector<std::string>>(); }

void require(bool ok, const char* field, const std::string& what) {
    if (!ok) throw ConfigInvalid(std::string(field) + ": " + what);
}
void require_positive(const json& p, const char* k) { require(num(p, k) > 0.0, k, "must be positive"); }
void require_count(const json& p, const char* k, int lo, int hi) {
    const int v = integer(p, k);
    require(v >= lo && v <= hi, k, "must lie in " + std::to_string(lo) + ".." + std::to_string(hi));
}

// ---- naming ----

std::string idx(int k) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d", k);
    return buf;
}

Ledger renamed(Ledger l, const std::string& name) {
    l.name = name;
    return l;
}

// ---- fixtures ----

Vec v2(double a, double b) {
    Vec x(2);
    x << a, b;
    return x;
}

// Hull of a small simplex around 0 and eight random points.
ConvexBody random_body(Rng& rng, int n) {
    std::vector<Vec> pts;
    for (int k = 0; k < n + 1; ++k) {
        Vec e = Vec::Zero(n);
        if (k < n) e(k) = 0.3;
        else e.setConstant(-0.3);
        pts.push_back(e);
    }
    for (int k = 0; k < 8; ++k) pts.push_back(rng.unit_vec(n) * rng.uniform(0.5, 2.0));
    return ConvexBody::from_vertices(pts);
}

ConvexBody symmetric_polygon(Rng& rng, int half) {
    std::vector<double> t(half);
    for (auto& x : t) x = rng.uniform(0.0, kPi);
    std::sort(t.begin(), t.end());
    std::vector<Vec> v;
    for (int k = 0; k < half; ++k) {
        const double r = rng.uniform(0.5, 2.0);
        v.push_back(r * v2(std::cos(t[k]), std::sin(t[k])));
        v.push_back(-v.back());
    }
    return ConvexBody::from_vertices(v);
}

ConvexBody box(double a, double b) { return ConvexBody::from_vertices({v2(a, b), v2(-a, b), v2(a, -b), v2(-a, -b)}); }

std::vector<double> random_weights(Rng& rng, int n) {
    std::vector<double> p(n);
    double total = 0.0;
    for (auto& x : p) total += (x = 0.05 + rng.uniform());
    for (auto& x : p) x /= total;
    return p;
}

void normalize(std::vector<double>& p) {
    const double t = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& x : p) x /= t;
}

// mu times a random positive factor: smooth exp(a x^2 + b cos(c x) [+ d x])
// or cellwise rough. Symmetrized on request.
GridMeasure random_histogram(const GridMeasure& mu, Rng& rng, bool symmetric) {
    GridMeasure m = mu;
    m.reference.reset();
    const bool smooth = rng.uniform() < 0.5;
    const double a = rng.uniform(-0.3, 0.3), b = rng.uniform(-1.0, 1.0), c = rng.uniform(0.5, 2.0);
    const double d = symmetric ? 0.0 : rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < m.p.size(); ++i) {
        const double x = m.grid.node(i)[0];
        m.p[i] *= smooth ? std::exp(a * x * x + b * std::cos(c * x) + d * x) : rng.uniform(0.05, 1.0);
    }
    normalize(m.p);
    return symmetric ? measures::symmetrize(m) : m;
}

WeightFunction family(const std::string& name, const json& p) {
    if (name == "gaussian") return WeightFunction::gaussian();
    if (name == "barenblatt") return WeightFunction::barenblatt(num(p, "s"));
    if (name == "cauchy") return WeightFunction::cauchy(num(p, "beta"));
    throw ConfigInvalid("families: unknown weight family '" + name + "'");
}

// Cells strictly inside the Barenblatt support.
// Cells tile [-0.9R, 0.9R]. k_s blows up at |x| = R, so cells reaching the
// boundary would make the half-cell cost slack unbounded. The reference is
// renormalized on the grid, which lowers H by -log(captured mass) and only
// makes the check stricter.
GridSpec barenblatt_grid(const WeightFunction& w, int nodes) {
    const double edge = 0.9 * w.support_radius();
    const double h = 2.0 * edge / nodes;
    return GridSpec::line(-edge + h / 2, edge - h / 2, nodes);
}

// ---- direct Blaschke-Santalo ----

ExperimentResult mahler_hanner(const json& p, std::uint64_t) {
    ExperimentResult out;
    const std::string prov = "Conjecture mahler: |K||K°| >= 4^n/n!, equality for Hanner polytopes";
    const double rel = num(p, "rel_tol");
    double worst = 0.0;
    int trees = 0;
    for (int n : ints(p, "dims")) {
        long long numer = 1, denom = 1;
        for (int i = 0; i < n; ++i) numer *= 4;
        for (int i = 2; i <= n; ++i) denom *= i;
        const double bound = double(numer) / double(denom);
        for (const auto& h : geometry::all_hanner_trees(n)) {
            ++trees;
            const std::string name = "n" + std::to_string(n) + "/" + h.to_string();
            const auto exact = geometry::exact_volume_product(n, geometry::hanner_vertices(h));
            out.ledgers.push_back(make_ledger(name + "/exact", bound, exact.value, 0.0, prov,
                                              "exact=" + exact.numerator + "/" + exact.denominator));
            const double vp = volume_product(geometry::hanner_body(h), VolumeProductMode::AtOrigin);
            worst = std::max(worst, std::fabs(vp - bound) / bound);
            out.ledgers.push_back(make_ledger(name + "/float", bound, vp, rel * bound, prov));
        }
    }
    out.metrics = {{"trees", trees}, {"max_rel_error", worst}};
    return out;
}

ExperimentResult bs_random(const json& p, std::uint64_t seed) {
    ExperimentResult out;
    Rng rng(seed);
    const auto dims = ints(p, "dims");
    double worst = 0.0;
    for (int k = 0; k < integer(p, "count"); ++k) {
        const int n = dims[std::size_t(k) % dims.size()];
        const auto l = bs_check(random_body(rng, n));
        worst = std::max(worst, l.lhs / l.rhs);
        out.ledgers.push_back(renamed(l, idx(k) + "/n" + std::to_string(n)));
    }
    out.metrics = {{"max_ratio", worst}};
    return out;
}

ExperimentResult bs_fixtures(const json&, std::uint64_t) {
    ExperimentResult out;
    Mat M2(2, 2), M3(3, 3);
    M2 << 1.5, 0.2, 0.2, 0.8;
    M3 << 2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 0.5;
    out.ledgers.push_back(renamed(bs_check(ConvexBody::ellipsoid(M2)), "ellipsoid2"));
    out.ledgers.push_back(renamed(bs_check(ConvexBody::ellipsoid(M3)), "ellipsoid3"));
    out.ledgers.push_back(renamed(bs_check(ConvexBody::ball(2)), "ball2"));
    out.ledgers.push_back(renamed(bs_check(ConvexBody::ball(3)), "ball3"));
    out.ledgers.push_back(renamed(bs_check(ConvexBody::cube(2)), "cube2"));
    out.ledgers.push_back(renamed(bs_check(ConvexBody::cube(3)), "cube3"));
    const auto T = ConvexBody::from_vertices({v2(-1, -0.5), v2(1, -0.5), v2(0.2, 1.5)});
    out.ledgers.push_back(renamed(bs_check(T), "triangle"));
    out.ledgers.push_back(renamed(santalo_sign_check(T), "triangle/sign"));
    return out;
}

ExperimentResult santalo_triangle(const json& p, std::uint64_t) {
    ExperimentResult out;
    const std::string prov = "property: bar((K - z)°) = 0 characterizes the Santalo point";
    const auto T = ConvexBody::from_vertices({v2(-1, 0), v2(1, 0), v2(0, 1)});
    const Vec shift = v2(0.0, 0.25);
    const auto K = geometry::translate(T, -shift);
    SantaloFunctional F(K);
    const int N = integer(p, "grid");
    const double hx = 2.0 / (N - 1), hy = 1.0 / (N - 1);
    double best = kInf;
    Vec arg = Vec::Zero(2);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const Vec z = v2(-1.0 + i * hx, j * hy) - shift;
            if (F.interior_margin(z) <= 1e-9) continue;
            const double v = F.value(z);
            if (v < best) {
                best = v;
                arg = z;
            }
        }
    const auto r = santalo_point(K, num(p, "solver_tol"));
    const double res = F.polar_barycenter(r.point).norm();
    out.ledgers.push_back(make_ledger("first-order-residual", res, num(p, "residual_tol"), 0.0, prov));
    out.ledgers.push_back(make_ledger("grid/x", std::fabs(r.point(0) - arg(0)), hx, 0.0, prov, "grid spacing"));
    out.ledgers.push_back(make_ledger("grid/y", std::fabs(r.point(1) - arg(1)), hy, 0.0, prov, "grid spacing"));
    out.ledgers.push_back(make_ledger("grid/value", r.polar_volume, best, 1e-12, prov, "minimum over the grid"));
    out.metrics = {{"point", {r.point(0) + shift(0), r.point(1) + shift(1)}},
                   {"grid_point", {arg(0) + shift(0), arg(1) + shift(1)}},
                   {"residual", res}};
    return out;
}

// ---- s-concave ----

double rho_s(double s, double t) {
    if (s == 0.0) return std::exp(-t / 2.0);
    const double a = 1.0 - s * t;
    if (a <= 0.0) return 0.0;
    return std::pow(a, 1.0 / (2.0 * s));
}

// (int rho_s(|x|^2) dx)^2 by double-exponential quadrature in the radius.
double cs_quadrature(double s, int n) {
    auto radial = [&](double r) { return rho_s(s, r * r) * (n == 1 ? 2.0 : 2.0 * kPi * r); };
    double I;
    if (s > 0.0) {
        boost::math::quadrature::tanh_sinh<double> ts;
        I = ts.integrate(radial, 0.0, 1.0 / std::sqrt(s));
    } else {
        boost::math::quadrature::exp_sinh<double> es;
        I = es.integrate(radial, 0.0, kInf);
    }
    return I * I;
}

ExperimentResult cs_constants(const json& p, std::uint64_t) {
    ExperimentResult out;
    const std::string prov = "c_s = (int rho_s(|x|^2) dx)^2, direct explicit computation";
    const double rel = num(p, "rel_tol");
    for (double s : nums(p, "s"))
        for (int n : ints(p, "dims")) {
            const double q = cs_quadrature(s, n), c = sconcave::cs_constant({s}, n);
            out.ledgers.push_back(make_ledger("s=" + format_double(s) + "/n" + std::to_string(n), q, c, rel * q, prov,
                                              "lhs quadrature, rhs closed form"));
        }
    out.ledgers.push_back(make_ledger("s=0.5/n1/value", 32.0 / 9.0, sconcave::cs_constant({0.5}, 1), 1e-12 * 32.0 / 9.0,
                                      prov, "c_{1/2} = 32/9 in dimension 1"));
    return out;
}

ExperimentResult ps_hanner(const json& p, std::uint64_t) {
    ExperimentResult out;
    auto tent = GridFunction::sample(GridSpec::line(-1.5, 1.5, integer(p, "tent_nodes")), [](const Vec& x) {
        return std::max(0.0, 1.0 - std::fabs(x[0]));
    });
    const auto p1 = sconcave::ps_functional(tent, {1.0});
    out.ledgers.push_back(renamed(p1.ledger, "s=1/tent"));

    const double W = num(p, "laplace_half_width");
    auto lap = GridFunction::sample(GridSpec::line(-W, W, integer(p, "laplace_nodes")),
                                    [](const Vec& x) { return std::exp(-std::fabs(x[0])); });
    const auto p0 = sconcave::ps_functional(lap, {0.0}, GridSpec::line(-2.0, 2.0, integer(p, "laplace_dual_nodes")));
    out.ledgers.push_back(renamed(p0.ledger, "s=0/laplace"));

    const double G = num(p, "gauge_half_width");
    auto g = GridFunction::sample(GridSpec::line(-G, G, integer(p, "gauge_nodes")),
                                  [](const Vec& x) { return std::pow(std::max(std::fabs(x[0]), 1.0), -3.0); });
    const auto pn = sconcave::ps_functional(g, {-1.0 / 3.0});
    out.ledgers.push_back(renamed(pn.ledger, "s=-1/3/square-gauge"));

    out.metrics = {{"s=1", {{"value", p1.value}, {"bound", sconcave::hanner_bound({1.0}, 1)}}},
                   {"s=0", {{"value", p0.value}, {"bound", sconcave::hanner_bound({0.0}, 1)}}},
                   {"s=-1/3",
                    {{"value", pn.value},
                     {"bound", sconcave::hanner_bound({-1.0 / 3.0}, 1)},
                     // Saint-Raymond constant redone on C(f): 4^n / ((1+s)...(1+ns) (1+ns))
                     {"corrected_bound", sconcave::hanner_bound({-1.0 / 3.0}, 1) / (1.0 - 1.0 / 3.0)}}}};
    return out;
}

// Largest difference quotient between finite neighbours.
double grid_lipschitz(const GridFunction& f) {
    const auto& g = f.grid;
    double lip = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto id = g.multi_index(i);
        for (int a = 0; a < g.dim; ++a) {
            if (id[a] + 1 >= g.n[a]) continue;
            auto nb = id;
            ++nb[a];
            const double u = f.values[i], v = f.values[g.flat_index(nb)];
            if (std::isfinite(u) && std::isfinite(v)) lip = std::max(lip, std::fabs(u - v) / g.spacing(a));
        }
    }
    return lip;
}

ExperimentResult triple_dual(const json& p, std::uint64_t seed) {
    ExperimentResult out;
    const std::string prov = "property: L_s L_s L_s = L_s on sampled functions";
    Rng rng(seed);
    const int n1 = integer(p, "nodes_1d"), n2 = integer(p, "nodes_2d");
    double worst = 0.0;
    for (double s : nums(p, "s"))
        for (int trial = 0; trial < integer(p, "per_s"); ++trial) {
            const bool two_d = trial % 5 == 4;
            const auto grid = two_d ? GridSpec::square(-1.0, 1.0, n2) : GridSpec::line(-1.0, 1.0, n1);
            const auto dual = two_d ? GridSpec::square(-2.0, 2.0, n2) : GridSpec::line(-2.0, 2.0, n1);
            GridFunction g{grid, std::vector<double>(grid.size())};
            for (double& v : g.values) v = rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.1, 2.0);
            g.values[grid.size() / 2] = 1.0;
            const auto L1 = sconcave::ls_transform(g, {s}, dual);
            const auto L3 = sconcave::ls_transform(sconcave::ls_transform(L1, {s}, grid), {s}, dual);
            double err = 0.0;
            for (std::size_t i = 0; i < L1.values.size(); ++i) err = std::max(err, std::fabs(L1.values[i] - L3.values[i]));
            const double bound = 2.0 * grid_lipschitz(L1) * dual.mesh();
            worst = std::max(worst, err);
            out.ledgers.push_back(make_ledger("s=" + format_double(s) + "/" + idx(trial) + (two_d ? "/2d" : "/1d"), err,
                                              bound, 0.0, prov, "rhs = 2 Lip h on the dual grid"));
        }
    out.metrics = {{"max_error", worst}};
    return out;
}

// ---- transport ----

struct OtInstance {
    transport::CostMatrix c;
    std::vector<double> p, q;
    std::string pattern;
};

OtInstance random_instance(Rng& rng, int t, int max_atoms, double forbidden) {
    OtInstance in;
    const int m = 4 + rng.below(max_atoms - 3), k = 4 + rng.below(max_atoms - 3);
    in.p = random_weights(rng, m);
    in.q = random_weights(rng, k);
    switch (t % 4) {
        case 0:
            in.pattern = "dense";
            in.c.c = Mat(m, k);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < k; ++j) in.c.c(i, j) = rng.uniform();
            break;
        case 1:
            in.pattern = "random-forbidden";
            in.c.c = Mat(m, k);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < k; ++j) in.c.c(i, j) = rng.uniform() < forbidden ? kInf : rng.uniform();
            break;
        case 2:
            in.pattern = "band";
            in.c.c = Mat(m, k);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < k; ++j) {
                    const double d = std::fabs((i + 0.5) / m - (j + 0.5) / k);
                    in.c.c(i, j) = d > 0.35 ? kInf : d * d + 0.1 * rng.uniform();
                }
            break;
        default: {
            in.pattern = "alpha";
            std::vector<Vec> U, V;
            for (int i = 0; i < m; ++i) U.push_back(rng.unit_vec(2));
            for (int j = 0; j < k; ++j) V.push_back(rng.unit_vec(2));
            in.c = transport::cost_alpha(U, V);
        }
    }
    return in;
}

ExperimentResult ot_cross(const json& p, std::uint64_t seed) {
    ExperimentResult out;
    const std::string prov_obj = "property: entropic optimum tends to the exact optimum as epsilon -> 0";
    const std::string prov_dual = "property: strong duality of the transportation LP";
    Rng rng(seed);
    transport::SinkhornOptions opt;
    opt.epsilon = num(p, "epsilon");
    opt.tol = num(p, "marginal_tol");
    double max_delta = 0.0, max_gap = 0.0;
    for (int t = 0; t < integer(p, "count"); ++t) {
        OtInstance in;
        transport::ExactResult ex;
        int attempts = 0;
        do {
            in = random_instance(rng, t, integer(p, "max_atoms"), num(p, "forbidden_fraction"));
            ex = transport::solve_exact(in.c, in.p, in.q);
        } while (ex.status != transport::SolveStatus::Optimal && ++attempts < 50);
        const std::string name = idx(t) + "/" + in.pattern;
        if (ex.status != transport::SolveStatus::Optimal) {
            out.ledgers.push_back(skipped_ledger(name, "no feasible instance in 50 draws", prov_obj));
            continue;
        }
        const double primal = ex.plan.objective;
        const double gap = std::fabs(primal - ex.duals.objective(in.p, in.q)) + std::max(0.0, ex.duals.max_violation(in.c));
        max_gap = std::max(max_gap, gap);
        const std::string shape = std::to_string(in.p.size()) + "x" + std::to_string(in.q.size());
        out.ledgers.push_back(make_ledger(name + "/dual-gap", gap, num(p, "dual_gap_tol"), 0.0, prov_dual, shape));
        try {
            const auto sk = transport::solve_sinkhorn(in.c, in.p, in.q, opt);
            const double delta = std::fabs(sk.plan.objective - primal);
            max_delta = std::max(max_delta, delta);
            out.ledgers.push_back(make_ledger(name + "/objective", delta, num(p, "objective_tol"), 0.0, prov_obj,
                                              shape + " exact=" + format_double(primal) +
                                                  " sinkhorn=" + format_double(sk.plan.objective)));
        } catch (const NotConverged& e) {
            out.ledgers.push_back(skipped_ledger(name + "/objective", std::string("sinkhorn: ") + e.what(), prov_obj));
        }
    }
    out.metrics = {{"max_abs_delta_objective", max_delta}, {"max_dual_gap", max_gap}};
    return out;
}

ExperimentResult talagrand_equality(const json& p, std::uint64_t) {
    ExperimentResult out;
    using transport::TalagrandVariant;
    const double W = num(p, "half_width");
    const auto grid = GridSpec::line(-W, W, integer(p, "nodes"));
    const auto g = WeightFunction::gaussian(), c = WeightFunction::cauchy(num(p, "beta"));
    const auto b = WeightFunction::barenblatt(num(p, "s"));
    const auto mg = measures::mu_rho(g, grid).measure, mc = measures::mu_rho(c, grid).measure;
    const auto mb = measures::mu_rho(b, barenblatt_grid(b, integer(p, "barenblatt_nodes"))).measure;
    auto add = [&](const WeightFunction& w, TalagrandVariant v, const GridMeasure& mu, const std::string& name) {
        out.ledgers.push_back(renamed(transport::talagrand_check({w, v}, mu, mu, mu), w.name() + "/" + name));
    };
    add(g, TalagrandVariant::Restricted, mg, "restricted");
    add(g, TalagrandVariant::Unrestricted, mg, "unrestricted");
    add(b, TalagrandVariant::Barenblatt, mb, "barenblatt");
    add(c, TalagrandVariant::Cauchy, mc, "cauchy");
    add(c, TalagrandVariant::Restricted, mc, "restricted");
    return out;
}

transport::TalagrandVariant variant_for(const WeightFunction& w) {
    switch (w.kind()) {
        case measures::WeightKind::Barenblatt: return transport::TalagrandVariant::Barenblatt;
        case measures::WeightKind::Cauchy: return transport::TalagrandVariant::Cauchy;
        default: return transport::TalagrandVariant::Restricted;
    }
}

ExperimentResult talagrand_random(const json& p, std::uint64_t seed) {
    ExperimentResult out;
    Rng rng(seed);
    const double W = num(p, "half_width");
    double min_gap = kInf;
    for (const auto& fam : strs(p, "families")) {
        const auto w = family(fam, p);
        const auto grid = w.kind() == measures::WeightKind::Barenblatt ? barenblatt_grid(w, integer(p, "barenblatt_nodes"))
                                                                         : GridSpec::line(-W, W, integer(p, "nodes"));
        const auto mu = measures::mu_rho(w, grid).measure;
        PlotSeries plot{fam + "_gaps", "pair", "gap", {}, {}};
        for (int k = 0; k < integer(p, "pairs"); ++k) {
            const auto a = random_histogram(mu, rng, true), b = random_histogram(mu, rng, true);
            const auto l = transport::talagrand_check({w, variant_for(w)}, a, b, mu);
            if (l.verdict != Verdict::Skipped) min_gap = std::min(min_gap, l.gap);
            plot.x.push_back(k);
            plot.y.push_back(l.gap);
            out.ledgers.push_back(renamed(l, fam + "/" + idx(k)));
        }
        out.plots.push_back(std::move(plot));
    }
    out.metrics = {{"min_gap", min_gap}};
    return out;
}

ExperimentResult barenblatt_centered(const json& p, std::uint64_t seed) {
    ExperimentResult out;
    Rng rng(seed);
    const auto w = WeightFunction::barenblatt(num(p, "s"));
    const auto mu = measures::mu_rho(w, barenblatt_grid(w, integer(p, "nodes"))).measure;
    for (int k = 0; k < integer(p, "pairs"); ++k) {
        const auto a = random_histogram(mu, rng, false), b = random_histogram(mu, rng, true);
        out.ledgers.push_back(
            renamed(transport::talagrand_check({w, transport::TalagrandVariant::Barenblatt}, a, b, mu), idx(k)));
    }
    return out;
}

// ---- sphere ----

sphere::SphereGrid sphere_grid(const std::string& which, const json& p) {
    if (which == "s1") return sphere::SphereGrid::circle(integer(p, "circle_half"));
    if (which == "s2") return sphere::SphereGrid::icosahedral(integer(p, "ico_level"));
    throw ConfigInvalid("spheres: expected \"s1\" or \"s2\", got '" + which + "'");
}

ExperimentResult nonsym_cap(const json& p, std::uint64_t) {
    ExperimentResult out;
    const std::string prov = "Lemma lem:nonsym: T_alpha(nu, sigma) = +inf for a cap while H(nu|sigma) is finite";
    const auto g = sphere::SphereGrid::circle(integer(p, "circle_half"));
    const auto r = sphere::nonsym_cap_check(g, v2(1, 0), num(p, "radius"));
    out.ledgers.push_back(make_ledger("entropy-below-transport", r.entropy, r.transport, 0.0, prov,
                                      std::string(r.infeasible ? "Infeasible" : "feasible") +
                                          " cap_mass=" + format_double(r.cap_mass)));
    out.ledgers.push_back(make_ledger("entropy-identity", r.entropy, -std::log(r.cap_mass), 1e-12, prov,
                                      "H(nu|sigma) = -log sigma(A)"));
    out.ledgers.push_back(make_ledger("enlargement-mass", r.enlarged, 1.0, 0.0, prov, "sigma(A_{pi/2}) < 1"));
    out.metrics = {{"infeasible", r.infeasible}, {"entropy", r.entropy}, {"cap_mass", r.cap_mass}};
    return out;
}

// 0.05 + sum_k a_k |c_k . u|^{p_k}: even, positive, smooth off great circles.
std::function<double(const Vec&)> random_even_density(Rng& rng, int dim) {
    std::vector<Vec> c;
    std::vector<double> a, e;
    for (int k = 0; k < 3; ++k) {
        c.push_back(rng.unit_vec(dim));
        a.push_back(rng.uniform(0.0, 2.0));
        e.push_back(rng.uniform(1.0, 6.0));
    }
    return [c, a, e](const Vec& u) {
        double f = 0.05;
        for (std::size_t k = 0; k < c.size(); ++k) f += a[k] * std::pow(std::fabs(c[k].dot(u)), e[k]);
        return f;
    };
}

ExperimentResult kolesnikov(const json& p, std::uint64_t seed) {
    ExperimentResult out;
    Rng rng(seed);
    double min_gap = kInf;
    for (const auto& which : strs(p, "spheres")) {
        const auto g = sphere_grid(which, p);
        const auto s = sphere::SphericalMeasure::uniform(g);
        out.ledgers.push_back(renamed(sphere::kolesnikov_check(g, s, s), which + "/sigma-sigma"));
        PlotSeries plot{which + "_gaps", "pair", "gap", {}, {}};
        for (int k = 0; k < integer(p, "pairs"); ++k) {
            const auto a = sphere::SphericalMeasure::from_density(g, random_even_density(rng, g.ambient_dim()));
            const auto b = sphere::SphericalMeasure::from_density(g, random_even_density(rng, g.ambient_dim()));
            const auto l = sphere::kolesnikov_check(g, a, b);
            if (l.verdict != Verdict::Skipped) min_gap = std::min(min_gap, l.gap);
            plot.x.push_back(k);
            plot.y.push_back(l.gap);
            out.ledgers.push_back(renamed(l, which + "/" + idx(k)));
        }
        out.plots.push_back(std::move(plot));
    }
    out.metrics = {{"min_gap", min_gap}};
    return out;
}

ExperimentResult sphere_poincare(const json& p, std::uint64_t) {
    ExperimentResult out;
    auto u1sq = [](const Vec& u) { return u[0] * u[0]; };
    auto grad = [](const Vec& u) {
        Vec g = Vec::Zero(u.size());
        g[0] = 2 * u[0];
        return g;
    };
    const double tol = num(p, "tol");
    json ratios = json::object();
    for (const std::string which : {"s1", "s2"}) {
        const auto g = sphere_grid(which, p);
        const auto l = sphere::sphere_poincare_check(g, u1sq, grad, tol);
        const double n1 = g.ambient_dim();
        ratios[which] = l.rhs / (l.lhs / (2.0 * n1));
        out.ledgers.push_back(renamed(l, which + "/u1^2"));
    }
    const auto g1 = sphere_grid("s1", p);
    out.ledgers.push_back(renamed(
        sphere::sphere_poincare_check(g1, [](const Vec& u) { return std::pow(u[0], 4); }, nullptr, tol), "s1/u1^4"));
    out.metrics = {{"ratio", ratios}};
    return out;
}

// ---- cone measures and log-Minkowski ----

ExperimentResult cone_measures(const json& p, std::uint64_t seed) {
    ExperimentResult out;
    const std::string prov_exact = "closed-form cone masses h_C(u_i)|F_i| / ((n+1)|C|)";
    const std::string prov_mc = "cone measure as the Gauss-map image of uniform points";
    struct Fixture {
        std::string name;
        ConvexBody body;
        double mass;
    };
    const std::vector<Fixture> exact = {
        {"cube2", ConvexBody::cube(2, 0.5), 0.25},
        {"cross2", geometry::normalize_volume(ConvexBody::cross_polytope(2)), 0.25},
        {"cube3", ConvexBody::cube(3, 0.5), 1.0 / 6.0},
        {"cross3", geometry::normalize_volume(ConvexBody::cross_polytope(3)), 1.0 / 8.0},
    };
    const double exact_tol = num(p, "exact_tol");
    for (const auto& f : exact) {
        const auto cm = sphere::cone_measure(f.body, true);
        double dev = 0.0;
        for (double m : cm.masses) dev = std::max(dev, std::fabs(m - f.mass));
        out.ledgers.push_back(make_ledger(f.name + "/exact", dev, 0.0, exact_tol, prov_exact,
                                          std::to_string(cm.masses.size()) + " facets, mass " + format_double(f.mass)));
    }
    Rng rng(seed);
    std::vector<Fixture> mc = exact;
    mc.push_back({"hexagon", geometry::normalize_volume(symmetric_polygon(rng, 3)), 0.0});
    const long samples = integer(p, "samples");
    const double sigmas = num(p, "sigmas");
    for (const auto& f : mc) {
        const auto cm = sphere::cone_measure(f.body, true);
        const auto freq = sphere::cone_measure_monte_carlo(f.body, samples, rng);
        double worst = 0.0;
        for (std::size_t i = 0; i < freq.size(); ++i) {
            const double se = std::sqrt(cm.masses[i] * (1 - cm.masses[i]) / double(samples));
            worst = std::max(worst, std::fabs(freq[i] - cm.masses[i]) / se);
        }
        out.ledgers.push_back(make_ledger(f.name + "/monte-carlo", worst, sigmas, 0.0, prov_mc,
                                          "lhs = max |freq - mass| / standard error, " + std::to_string(samples) +
                                              " samples"));
    }
    return out;
}

// Cone masses of C at the atoms of nu (0 when C has no facet there).
std::vector<double> masses_at(const ConvexBody& C, const sphere::SphericalMeasure& nu) {
    const auto cm = sphere::cone_measure(C, true);
    std::vector<double> out(nu.size(), 0.0);
    for (std::size_t i = 0; i < nu.size(); ++i)
        for (std::size_t j = 0; j < cm.normals.size(); ++j)
            if ((cm.normals[j] - nu.points[i]).norm() < 1e-9) out[i] = cm.masses[j];
    return out;
}

ExperimentResult log_minkowski(const json& p, std::uint64_t) {
    ExperimentResult out;
    const std::string prov = "property: the minimizer of Phi_nu at unit volume has cone measure nu";
    struct Fixture {
        std::string name;
        ConvexBody body;
        std::vector<double> start;
    };
    const std::vector<Fixture> fixtures = {
        {"cube", ConvexBody::cube(2, 0.5), {2.0, 2.0, 0.5, 0.5}},
        {"cross", geometry::normalize_volume(ConvexBody::cross_polytope(2)), {}},
        {"rectangle", geometry::normalize_volume(box(1.0, 0.5)), {1.0, 1.0, 0.5, 0.5}},
    };
    for (const auto& f : fixtures) {
        const auto nu = sphere::cone_measure(f.body, true).measure();
        sphere::LogMinkowskiOptions opt;
        opt.tol = num(p, "solver_tol");
        opt.max_iter = integer(p, "max_iter");
        opt.initial_h = f.start;
        const auto r = sphere::log_minkowski_solve(nu, opt);
        const double tv = measures::total_variation(masses_at(r.body, nu), nu.weights);
        out.ledgers.push_back(make_ledger(f.name, tv, num(p, "tol"), 0.0, prov,
                                          "iterations=" + std::to_string(r.iterations)));
    }
    return out;
}

ExperimentResult lsi_unconditional(const json& p, std::uint64_t) {
    ExperimentResult out;
    const std::string prov = "Remark rem:sharpness: equality for the normalized cube and cross-polytope";
    const auto g = sphere::SphereGrid::circle(integer(p, "circle_half"));
    const auto cube = ConvexBody::cube(2, 0.5);
    const auto cross = geometry::normalize_volume(ConvexBody::cross_polytope(2));
    out.ledgers.push_back(renamed(sphere::lsi_unconditional_check(cube, cross, g, num(p, "tol")), "cube-cross"));
    const auto t = sphere::mahler_identity(ConvexBody::cube(2));
    const double chain_tol = num(p, "chain_tol"), l2 = std::log(2.0);
    out.ledgers.push_back(make_ledger("chain/transport", l2, t.transport, chain_tol, prov, "(n+1) T_alpha = log 2"));
    out.ledgers.push_back(make_ledger("chain/h-term", -2 * l2, t.h_term, chain_tol, prov, "int log h^2 dnu_1 = -2 log 2"));
    out.ledgers.push_back(make_ledger("chain/rho-term", -l2, t.rho_term, chain_tol, prov, "int log rho^2 dnu_2 = -log 2"));
    return out;
}

ExperimentResult improved_mahler(const json& p, std::uint64_t seed) {
    ExperimentResult out;
    Rng rng(seed);
    const double tol = num(p, "tol");
    std::vector<std::pair<std::string, ConvexBody>> bodies = {{"cube", ConvexBody::cube(2)},
                                                              {"cross", ConvexBody::cross_polytope(2)}};
    const int count = integer(p, "count");
    for (int k = 2; k < count; ++k) {
        if (k % 2 == 0) {
            bodies.push_back({"box" + idx(k), box(rng.uniform(0.3, 3.0), 1.0)});
        } else {
            const double a = rng.uniform(0.2, 1.0), b = rng.uniform(0.2, 1.0);
            std::vector<Vec> v;
            for (double sx : {-1.0, 1.0})
                for (double sy : {-1.0, 1.0}) {
                    v.push_back(v2(sx, sy * a));
                    v.push_back(v2(sx * b, sy));
                }
            bodies.push_back({"octagon" + idx(k), ConvexBody::from_vertices(v)});
        }
    }
    for (const auto& [name, C] : bodies) out.ledgers.push_back(renamed(sphere::improved_mahler_check(C, tol), name));
    return out;
}

ExperimentResult concentration(const json& p, std::uint64_t seed) {
    ExperimentResult out;
    Rng rng(seed);
    for (const std::string which : {"s1", "s2"}) {
        const auto g = sphere_grid(which, p);
        const int d = g.ambient_dim();
        PlotSeries plot{which + "_enlargement", "r", "sigma(complement of A_r)", {}, {}};
        for (int k = 0; k < integer(p, "geometries"); ++k) {
            const Vec c1 = rng.unit_vec(d), c2 = rng.unit_vec(d), c3 = rng.unit_vec(d);
            const double r1 = rng.uniform(0.1, 0.6), r2 = rng.uniform(0.1, 0.6);
            out.ledgers.push_back(renamed(
                sphere::concentration_ab_check(g, sphere::symmetric_cap(g, c1, r1), sphere::symmetric_cap(g, c2, r2)),
                which + "/" + idx(k) + "/ab"));
            const double rho = rng.uniform(1.1, 1.5), r = rng.uniform(0.05, 1.2);
            const auto l = sphere::concentration_enlargement_check(g, sphere::symmetric_cap(g, c3, rho), r);
            if (l.verdict != Verdict::Skipped) {
                plot.x.push_back(r);
                plot.y.push_back(l.lhs);
            }
            out.ledgers.push_back(renamed(l, which + "/" + idx(k) + "/enlargement"));
        }
        out.plots.push_back(std::move(plot));
    }
    return out;
}

// ---- linearization ----

GridFunction sample_1d(const GridSpec& grid, const std::function<double(double)>& f) {
    GridFunction out{grid, {}};
    for (std::size_t i = 0; i < grid.size(); ++i) out.values.push_back(f(grid.node(i)[0]));
    return out;
}

ExperimentResult weighted_poincare(const json& p, std::uint64_t seed) {
    ExperimentResult out;
    const double W = num(p, "half_width"), tol = num(p, "tol");
    const auto grid = GridSpec::line(-W, W, integer(p, "nodes"));
    const auto g = WeightFunction::gaussian();
    out.ledgers.push_back(renamed(
        linearize::weighted_poincare_check(sample_1d(grid, [](double x) { return x * x - 1; }), g, tol), "gaussian/x^2-1"));
    out.ledgers.push_back(renamed(
        linearize::weighted_poincare_check(sample_1d(grid, [](double x) { return std::pow(x, 4) - 3; }), g, tol),
        "gaussian/x^4-3"));
    Rng rng(seed);
    for (int k = 0; k < integer(p, "random"); ++k) {
        const double a = rng.normal(), b = rng.normal(), c = rng.normal();
        const auto f = sample_1d(grid, [&](double x) { return a * x * x + b * std::cos(x) + c * std::exp(-x * x); });
        out.ledgers.push_back(renamed(linearize::weighted_poincare_check(f, g, tol), "gaussian/random" + idx(k)));
    }
    const auto plane = GridSpec::square(-7, 7, integer(p, "nodes_2d"));
    GridFunction f2{plane, {}};
    for (std::size_t i = 0; i < plane.size(); ++i) f2.values.push_back(plane.node(i)[0] * plane.node(i)[1]);
    out.ledgers.push_back(renamed(linearize::weighted_poincare_check(f2, g, tol), "gaussian/x1x2"));
    return out;
}

ExperimentResult taylor(const json& p, std::uint64_t) {
    ExperimentResult out;
    const std::string prov = "Lemma lem:hopf-lax_lin: omega(y+h, y) = H_rho h.h / 2 + o(|h|^2)";
    const auto radii = nums(p, "radii");
    struct Case {
        std::string name;
        WeightFunction w;
        Vec y;
    };
    Vec e1 = v2(1, 0), e2 = v2(0, 1);
    const std::vector<Case> cases = {{"gaussian", WeightFunction::gaussian(), e1},
                                     {"cauchy1", WeightFunction::cauchy(1.0), e2},
                                     {"cauchy2-3d", WeightFunction::cauchy(2.0), Vec::Constant(3, 0.7)}};
    json monotone = json::object();
    for (const auto& c : cases) {
        const auto rep = linearize::taylor_check(c.w, c.y, radii);
        monotone[c.name] = {{"monotone", rep.monotone}, {"order", rep.order}, {"residual", rep.residual}};
        for (std::size_t i = 1; i < rep.radii.size(); ++i)
            out.ledgers.push_back(make_ledger(c.name + "/r=" + format_double(rep.radii[i]), rep.residual[i],
                                              rep.residual[i - 1], 0.0, prov,
                                              "rhs = residual at r=" + format_double(rep.radii[i - 1])));
        out.plots.push_back({c.name, "radius", "normalized residual", rep.radii, rep.residual});
    }
    out.metrics = monotone;
    return out;
}

ExperimentResult linearization_chain(const json& p, std::uint64_t) {
    ExperimentResult out;
    const std::string prov = "Talagrand inequality on (1 +- eps f) mu_rho, gap of order eps^2";
    const double W = num(p, "half_width");
    const auto grid = GridSpec::line(-W, W, integer(p, "nodes"));
    const auto f = sample_1d(grid, [](double x) { return std::exp(-x * x / 2) * (1 + x * x); });
    const auto rows = linearize::linearization_chain(f, WeightFunction::gaussian(), nums(p, "epsilons"));
    PlotSeries plot{"normalized_gap", "eps", "gap / eps^2", {}, {}};
    for (const auto& r : rows) {
        Ledger l{"eps=" + format_double(r.eps), r.lhs, r.rhs, r.gap, r.tol, r.verdict, prov,
                 "gap/eps^2=" + format_double(r.normalized_gap)};
        out.ledgers.push_back(l);
        plot.x.push_back(r.eps);
        plot.y.push_back(r.normalized_gap);
    }
    out.plots.push_back(std::move(plot));
    return out;
}

// ---- registry ----

std::vector<ExperimentKind> build_registry() {
    std::vector<ExperimentKind> r;
    auto add = [&](std::string name, std::string module, std::string desc, bool randomized, json defaults,
                   auto run, std::function<void(const json&)> check = nullptr) {
        r.push_back({std::move(name), std::move(module), std::move(desc), randomized, std::move(defaults), run,
                     std::move(check)});
    };
    add("mahler-hanner", "santalo", "exact and floating volume products of every Hanner polytope", false,
        {{"dims", {2, 3, 4}}, {"rel_tol", 1e-9}}, mahler_hanner, [](const json& p) {
            for (int n : ints(p, "dims")) require(n >= 1 && n <= 4, "dims", "Hanner dimensions must lie in 1..4");
            require_positive(p, "rel_tol");
        });
    add("bs-random", "santalo", "bs_check on random bodies around the origin", true, {{"count", 100}, {"dims", {2, 3}}},
        bs_random, [](const json& p) {
            require_count(p, "count", 1, 100000);
            require(!ints(p, "dims").empty(), "dims", "must not be empty");
            for (int n : ints(p, "dims")) require(n >= 2 && n <= 3, "dims", "must lie in 2..3");
        });
    add("bs-fixtures", "santalo", "bs_check on ellipsoids, balls, cubes and a triangle", false, json::object(),
        bs_fixtures);
    add("santalo-triangle", "santalo", "Santalo point of a triangle against a brute-force grid", false,
        {{"grid", 401}, {"residual_tol", 1e-6}, {"solver_tol", 1e-8}}, santalo_triangle, [](const json& p) {
            require_count(p, "grid", 3, 4001);
            require_positive(p, "residual_tol");
            require_positive(p, "solver_tol");
        });
    add("cs-constants", "sconcave", "closed-form c_s against quadrature", false,
        {{"s", {0.0, 0.25, 0.5, 1.0}}, {"dims", {1, 2}}, {"rel_tol", 1e-6}}, cs_constants, [](const json& p) {
            for (int n : ints(p, "dims")) require(n == 1 || n == 2, "dims", "must be 1 or 2");
            for (double s : nums(p, "s")) require(s >= 0.0, "s", "quadrature oracle covers s >= 0");
            require_positive(p, "rel_tol");
        });
    add("ps-hanner", "sconcave", "P_s on the three Hanner-generated fixtures", false,
        {{"tent_nodes", 301},
         {"laplace_half_width", 800.0},
         {"laplace_nodes", 32001},
         {"laplace_dual_nodes", 2001},
         {"gauge_half_width", 40.0},
         {"gauge_nodes", 4001}},
        ps_hanner, [](const json& p) {
            for (const char* k : {"tent_nodes", "laplace_nodes", "laplace_dual_nodes", "gauge_nodes"})
                require_count(p, k, 3, 100001);
            require(num(p, "laplace_half_width") > 2.0, "laplace_half_width", "must exceed 2");
            require(num(p, "gauge_half_width") > 1.0, "gauge_half_width", "must exceed 1");
        });
    add("triple-dual", "sconcave", "L_s L_s L_s against L_s on random grid functions", true,
        {{"s", {0.0, 0.5, 1.0}}, {"per_s", 10}, {"nodes_1d", 101}, {"nodes_2d", 21}}, triple_dual, [](const json& p) {
            for (double s : nums(p, "s")) require(s >= 0.0, "s", "must be nonnegative");
            require_count(p, "per_s", 1, 1000);
            require_count(p, "nodes_1d", 3, 401);
            require_count(p, "nodes_2d", 3, 101);
        });
    add("ot-cross", "transport", "exact network simplex against entropic Sinkhorn", true,
        {{"count", 20},
         {"max_atoms", 25},
         {"forbidden_fraction", 0.2},
         {"epsilon", 1e-4},
         {"marginal_tol", 1e-9},
         {"objective_tol", 1e-3},
         {"dual_gap_tol", 1e-8}},
        ot_cross, [](const json& p) {
            require_count(p, "count", 1, 10000);
            require_count(p, "max_atoms", 4, 2000);
            require(num(p, "forbidden_fraction") >= 0.0 && num(p, "forbidden_fraction") < 1.0, "forbidden_fraction",
                    "must lie in [0, 1)");
            for (const char* k : {"epsilon", "marginal_tol", "objective_tol", "dual_gap_tol"}) require_positive(p, k);
        });
    add("talagrand-equality", "transport", "Talagrand ledgers at nu1 = nu2 = mu_rho", false,
        {{"nodes", 40}, {"half_width", 8.0}, {"s", 0.5}, {"beta", 1.0}, {"barenblatt_nodes", 30}}, talagrand_equality,
        [](const json& p) {
            require_count(p, "nodes", 2, 401);
            require_count(p, "barenblatt_nodes", 2, 401);
            require_positive(p, "half_width");
            require_positive(p, "s");
            require_positive(p, "beta");
        });
    add("talagrand-random", "transport", "Talagrand ledgers on random symmetric histogram pairs", true,
        {{"pairs", 50},
         {"families", {"gaussian", "barenblatt", "cauchy"}},
         {"nodes", 40},
         {"half_width", 8.0},
         {"s", 0.5},
         {"beta", 1.0},
         {"barenblatt_nodes", 30}},
        talagrand_random, [](const json& p) {
            require_count(p, "pairs", 1, 10000);
            for (const auto& f : strs(p, "families"))
                require(f == "gaussian" || f == "barenblatt" || f == "cauchy", "families",
                        "unknown weight family '" + f + "'");
            require_count(p, "nodes", 2, 401);
            require_count(p, "barenblatt_nodes", 2, 401);
            require_positive(p, "half_width");
            require_positive(p, "s");
            require_positive(p, "beta");
        });
    add("barenblatt-centered", "transport", "Barenblatt transport inequality with nu2 centered", true,
        {{"pairs", 30}, {"s", 0.5}, {"nodes", 30}}, barenblatt_centered, [](const json& p) {
            require_count(p, "pairs", 1, 10000);
            require_positive(p, "s");
            require_count(p, "nodes", 2, 401);
        });
    add("nonsym-cap", "sphere", "alpha transport from a cap to sigma", false, {{"circle_half", 128}, {"radius", kPi / 6}},
        nonsym_cap, [](const json& p) {
            require_count(p, "circle_half", 2, 2048);
            require(num(p, "radius") > 0.0 && num(p, "radius") < kPi / 4, "radius", "must lie in (0, pi/4)");
        });
    add("kolesnikov", "sphere", "(n+1) T_alpha <= H1 + H2 on random symmetric densities", true,
        {{"pairs", 30}, {"spheres", {"s1", "s2"}}, {"circle_half", 64}, {"ico_level", 2}}, kolesnikov,
        [](const json& p) {
            require_count(p, "pairs", 0, 10000);
            for (const auto& s : strs(p, "spheres")) require(s == "s1" || s == "s2", "spheres", "expected s1 or s2");
            require_count(p, "circle_half", 2, 2048);
            require_count(p, "ico_level", 0, 4);
        });
    add("sphere-poincare", "sphere", "Poincare ratio of u_1^2 on the circle and the sphere", false,
        {{"circle_half", 256}, {"ico_level", 4}, {"tol", 1e-3}}, sphere_poincare, [](const json& p) {
            require_count(p, "circle_half", 2, 2048);
            require_count(p, "ico_level", 0, 4);
            require_positive(p, "tol");
        });
    add("cone-measures", "sphere", "closed-form cone masses and Monte-Carlo Gauss-map frequencies", true,
        {{"samples", 1000000}, {"sigmas", 3.0}, {"exact_tol", 1e-15}}, cone_measures, [](const json& p) {
            require_count(p, "samples", 1, 100000000);
            require_positive(p, "sigmas");
            require(num(p, "exact_tol") >= 0.0, "exact_tol", "must be nonnegative");
        });
    add("log-minkowski", "sphere", "log-Minkowski solver on cube, cross and rectangle", false,
        {{"tol", 1e-5}, {"solver_tol", 1e-6}, {"max_iter", 20000}}, log_minkowski, [](const json& p) {
            require_positive(p, "tol");
            require_positive(p, "solver_tol");
            require_count(p, "max_iter", 1, 10000000);
        });
    add("lsi-unconditional", "sphere", "unconditional LSI at the cube/cross equality case", false,
        {{"circle_half", 1024}, {"tol", 5e-3}, {"chain_tol", 1e-9}}, lsi_unconditional, [](const json& p) {
            require_count(p, "circle_half", 2, 2048);
            require_positive(p, "tol");
            require_positive(p, "chain_tol");
        });
    add("improved-mahler", "sphere", "improved Mahler bound on unconditional planar bodies", true,
        {{"count", 20}, {"tol", 1e-6}}, improved_mahler, [](const json& p) {
            require_count(p, "count", 2, 10000);
            require_positive(p, "tol");
        });
    add("concentration", "sphere", "cap-family sweeps of the two concentration inequalities", true,
        {{"geometries", 50}, {"circle_half", 128}, {"ico_level", 3}}, concentration, [](const json& p) {
            require_count(p, "geometries", 1, 10000);
            require_count(p, "circle_half", 2, 2048);
            require_count(p, "ico_level", 0, 4);
        });
    add("weighted-poincare", "linearize", "weighted Poincare inequality for the Gaussian weight", true,
        {{"nodes", 401}, {"half_width", 10.0}, {"nodes_2d", 71}, {"random", 20}, {"tol", 5e-3}}, weighted_poincare,
        [](const json& p) {
            require_count(p, "nodes", 3, 4001);
            require(integer(p, "nodes") % 2 == 1, "nodes", "must be odd so the grid is symmetric with a centre node");
            require_count(p, "nodes_2d", 3, 401);
            require_count(p, "random", 0, 10000);
            require_positive(p, "half_width");
            require_positive(p, "tol");
        });
    add("taylor", "linearize", "second-order expansion of omega around the diagonal", false,
        {{"radii", {1e-1, 1e-2, 1e-3}}}, taylor, [](const json& p) {
            require(!nums(p, "radii").empty(), "radii", "must not be empty");
            for (double r : nums(p, "radii")) require(r > 0.0 && r < 0.5, "radii", "must lie in (0, 0.5)");
        });
    add("linearization-chain", "linearize", "Talagrand gap on (1 +- eps f) mu against eps^2", false,
        {{"nodes", 121}, {"half_width", 6.0}, {"epsilons", {0.1, 0.03, 0.01}}}, linearization_chain,
        [](const json& p) {
            require_count(p, "nodes", 3, 401);
            require_positive(p, "half_width");
            for (double e : nums(p, "epsilons")) require(e > 0.0 && e <= 0.5, "epsilons", "must lie in (0, 0.5]");
        });
    return r;
}

}  // namespace

const std::vector<ExperimentKind>& registry() {
    static const std::vector<ExperimentKind> r = build_registry();
    return r;
}

const ExperimentKind& find_kind(const std::string& name) {
    for (const auto& k : registry())
        if (k.name == name) return k;
    std::string known;
    for (const auto& k : registry()) known += (known.empty() ? "" : ", ") + k.name;
    throw ConfigInvalid("kind: unknown experiment kind '" + name + "' (known: " + known + ")");
}

}  // namespace santalo::harness

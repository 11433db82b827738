#include "santalo/measures.hpp"

#include "santalo/ledger.hpp"

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace santalo::measures {

// ------ weight functions

namespace {

// Fritsch-Butland monotone slopes, as in boost's pchip (whose 1.74 header
// does not compile under C++20).
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> s(n);
    s[0] = (y[1] - y[0]) / (x[1] - x[0]);
    s[n - 1] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double h0 = x[k] - x[k - 1], h1 = x[k + 1] - x[k];
        const double d0 = (y[k] - y[k - 1]) / h0, d1 = (y[k + 1] - y[k]) / h1;
        if (d0 * d1 <= 0.0) continue;
        const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
        s[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
    }
    return s;
}

}  // namespace

// log rho is interpolated against u = log t; below the table it is held
// constant, above it continues linearly in u.
struct WeightFunction::Table {
    std::vector<double> t, rho;
    double u_lo = 0.0, u_hi = 0.0, g_lo = 0.0, g_hi = 0.0, slope_hi = 0.0;
    boost::math::interpolators::cubic_hermite<std::vector<double>> g;

    Table(std::vector<double> t_, std::vector<double> rho_, std::vector<double> u, std::vector<double> gv,
          std::vector<double> slopes)
        : t(std::move(t_)), rho(std::move(rho_)), u_lo(u.front()), u_hi(u.back()), g_lo(gv.front()),
          g_hi(gv.back()), slope_hi(slopes.back()), g(std::move(u), std::move(gv), std::move(slopes)) {}

    double value(double u) const {
        if (u <= u_lo) return g_lo;
        if (u >= u_hi) return g_hi + slope_hi * (u - u_hi);
        return g(u);
    }
    double prime(double u) const {
        if (u <= u_lo) return 0.0;
        if (u >= u_hi) return slope_hi;
        return g.prime(u);
    }
};

WeightFunction WeightFunction::gaussian() { return WeightFunction{}; }

WeightFunction WeightFunction::barenblatt(double s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("Barenblatt weight needs s > 0");
    WeightFunction w;
    w.kind_ = WeightKind::Barenblatt;
    w.param_ = s;
    return w;
}

WeightFunction WeightFunction::cauchy(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("Cauchy weight needs beta > 0");
    WeightFunction w;
    w.kind_ = WeightKind::Cauchy;
    w.param_ = beta;
    return w;
}

WeightFunction WeightFunction::custom(std::vector<double> t, std::vector<double> rho) {
    if (t.size() != rho.size() || t.size() < 4) throw InvalidArgument("custom weight needs >= 4 (t, rho) pairs");
    std::vector<double> u(t.size()), g(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > 0.0) || (i > 0 && !(t[i] > t[i - 1])))
            throw InvalidArgument("custom weight t values must be positive and increasing");
        if (!(rho[i] > 0.0) || !std::isfinite(rho[i])) throw InvalidArgument("custom weight rho must be positive");
        u[i] = std::log(t[i]);
        g[i] = std::log(rho[i]);
    }
    auto slopes = pchip_slopes(u, g);
    WeightFunction w;
    w.kind_ = WeightKind::Custom;
    w.table_ = std::make_shared<const Table>(std::move(t), std::move(rho), std::move(u), std::move(g), std::move(slopes));
    return w;
}

std::string WeightFunction::name() const {
    switch (kind_) {
    case WeightKind::Gaussian: return "gaussian";
    case WeightKind::Barenblatt: return "barenblatt(s=" + format_double(param_) + ")";
    case WeightKind::Cauchy: return "cauchy(beta=" + format_double(param_) + ")";
    case WeightKind::Custom: return "custom";
    }
    return "";
}

nlohmann::json WeightFunction::to_json() const {
    switch (kind_) {
    case WeightKind::Gaussian: return {{"kind", "gaussian"}};
    case WeightKind::Barenblatt: return {{"kind", "barenblatt"}, {"s", param_}};
    case WeightKind::Cauchy: return {{"kind", "cauchy"}, {"beta", param_}};
    case WeightKind::Custom: return {{"kind", "custom"}, {"t", table_->t}, {"rho", table_->rho}};
    }
    return {};
}

WeightFunction WeightFunction::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ConfigInvalid("weight: expected an object with a string field \"kind\"");
    const std::string kind = j["kind"];
    auto number = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_number())
            throw ConfigInvalid(std::string("weight.") + key + ": expected a number");
        return j[key].get<double>();
    };
    try {
        if (kind == "gaussian") return gaussian();
        if (kind == "barenblatt") return barenblatt(number("s"));
        if (kind == "cauchy") return cauchy(number("beta"));
        if (kind == "custom") {
            if (!j.contains("t") || !j.contains("rho")) throw ConfigInvalid("weight: custom needs \"t\" and \"rho\"");
            return custom(j["t"].get<std::vector<double>>(), j["rho"].get<std::vector<double>>());
        }
    } catch (const InvalidArgument& e) {
        throw ConfigInvalid(std::string("weight: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("weight: ") + e.what());
    }
    throw ConfigInvalid("weight.kind: unknown kind \"" + kind + "\"");
}

double WeightFunction::operator()(double t) const { return std::exp(log_rho(t)); }

double WeightFunction::log_rho(double t) const {
    switch (kind_) {
    case WeightKind::Gaussian: return -0.5 * t;
    case WeightKind::Barenblatt: {
        const double a = 1.0 - param_ * t;
        return a > 0.0 ? std::log(a) / (2.0 * param_) : -kInf;
    }
    case WeightKind::Cauchy: return -param_ * std::log1p(t);
    case WeightKind::Custom: return t > 0.0 ? table_->value(std::log(t)) : table_->g_lo;
    }
    return 0.0;
}

double WeightFunction::dlog_rho(double t) const {
    switch (kind_) {
    case WeightKind::Gaussian: return -0.5;
    case WeightKind::Barenblatt: {
        const double a = 1.0 - param_ * t;
        return a > 0.0 ? -0.5 / a : -kInf;
    }
    case WeightKind::Cauchy: return -param_ / (1.0 + t);
    case WeightKind::Custom: return t > 0.0 ? table_->prime(std::log(t)) / t : 0.0;
    }
    return 0.0;
}

double WeightFunction::d2_ratio(double t) const {
    switch (kind_) {
    case WeightKind::Gaussian: return 0.25;
    case WeightKind::Barenblatt: {
        const double a = 1.0 - param_ * t;
        return (1.0 - 2.0 * param_) / (4.0 * a * a);
    }
    case WeightKind::Cauchy: return param_ * (param_ + 1.0) / ((1.0 + t) * (1.0 + t));
    case WeightKind::Custom: {
        // A wide five-point stencil in t; differentiating the cubic pieces
        // directly loses (log rho)'' to cancellation at small t.
        const double x = std::max(t, table_->t.front()), d = 0.05 * x;
        auto L = [&](double y) { return log_rho(y); };
        const double l2 = (-L(x + 2 * d) + 16 * L(x + d) - 30 * L(x) + 16 * L(x - d) - L(x - 2 * d)) / (12 * d * d);
        const double l1 = dlog_rho(t);
        return l2 + l1 * l1;
    }
    }
    return 0.0;
}

double WeightFunction::support_radius() const {
    return kind_ == WeightKind::Barenblatt ? 1.0 / std::sqrt(param_) : kInf;
}

double WeightFunction::normalization(int n) const {
    if (n < 1) throw InvalidArgument("normalization: dimension must be positive");
    const double hn = 0.5 * n;
    switch (kind_) {
    case WeightKind::Gaussian: return std::pow(2.0 * kPi, hn);
    case WeightKind::Barenblatt: {
        const double a = 0.5 / param_;
        return std::pow(kPi / param_, hn) * std::exp(std::lgamma(a + 1.0) - std::lgamma(a + 1.0 + hn));
    }
    case WeightKind::Cauchy:
        if (!(param_ > hn)) throw DivergentIntegral("Cauchy weight needs beta > n/2");
        return std::pow(kPi, hn) * std::exp(std::lgamma(param_ - hn) - std::lgamma(param_));
    case WeightKind::Custom: {
        if (!(2.0 * table_->slope_hi + n < 0.0)) throw DivergentIntegral("custom weight tail is not integrable");
        const double sphere_area = n * unit_ball_volume(n);
        boost::math::quadrature::exp_sinh<double> q;
        const double radial = q.integrate([&](double r) {
            return r > 0.0 ? std::pow(r, n - 1) * (*this)(r * r) : 0.0;
        });
        return sphere_area * radial;
    }
    }
    return 0.0;
}

AdmissibilityReport check_admissible(const WeightFunction& w, int n) {
    AdmissibilityReport r;
    double u_lo = -10.0, u_hi = 10.0;
    if (w.kind() == WeightKind::Barenblatt) u_hi = std::log(1.0 / w.param()) - 1e-3;
    // the table range plus one unit of extrapolation on each side
    if (w.kind() == WeightKind::Custom) {
        const auto j = w.to_json();
        u_lo = std::log(j["t"].front().get<double>()) - 1.0;
        u_hi = std::log(j["t"].back().get<double>()) + 1.0;
    }
    constexpr int N = 1000;
    std::vector<double> v(N);
    for (int i = 0; i < N; ++i) v[i] = w.v(u_lo + (u_hi - u_lo) * i / (N - 1));

    r.monotone = true;
    r.convex = true;
    r.strictly_convex = true;
    for (int i = 0; i < N; ++i) {
        const double scale = std::max(1.0, std::fabs(v[i]));
        if (!std::isfinite(v[i])) r.monotone = r.convex = false;
        if (i > 0 && v[i] - v[i - 1] < -1e-12 * scale) r.monotone = false;
        if (i > 0 && i + 1 < N) {
            const double d2 = v[i + 1] - 2.0 * v[i] + v[i - 1];
            if (d2 < -1e-12 * scale) r.convex = false;
            if (!(d2 > 1e-13 * scale)) r.strictly_convex = false;
        }
    }
    r.strictly_convex = r.strictly_convex && r.convex;
    if (!r.monotone) r.failures.push_back("rho is not non-increasing");
    if (!r.convex) r.failures.push_back("t -> -log rho(e^t) is not convex");

    try {
        r.integrable = std::isfinite(w.normalization(n));
    } catch (const DivergentIntegral&) {
        r.integrable = false;
    }
    if (!r.integrable) r.failures.push_back("rho(|x|^2) is not integrable on R^" + std::to_string(n));
    r.admissible = r.monotone && r.convex && r.integrable;
    return r;
}

// ------ grid measures

namespace {

constexpr int kSubdivide = 32;

void require_same_grid(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) throw GridMismatch("measures live on different grids");
}

bool symmetric_grid(const GridSpec& g) {
    for (int a = 0; a < g.dim; ++a) {
        const double scale = std::max(std::fabs(g.lo[a]), std::fabs(g.hi[a]));
        if (std::fabs(g.lo[a] + g.hi[a]) > 1e-12 * scale) return false;
    }
    return true;
}

std::size_t reflected_index(const GridSpec& g, std::size_t i) {
    auto idx = g.multi_index(i);
    for (int a = 0; a < g.dim; ++a) idx[a] = g.n[a] - 1 - idx[a];
    return g.flat_index(idx);
}

}  // namespace

std::vector<double> cell_integrals(const GridSpec& grid, const std::function<double(const Vec&)>& f,
                                   const std::function<bool(const Vec&, double)>& fine) {
    grid.validate();
    using GL = boost::math::quadrature::gauss<double, 5>;
    // nodes and weights of the 5-point rule on [-1/2, 1/2]
    std::vector<double> gx, gw;
    for (std::size_t k = 0; k < GL::abscissa().size(); ++k) {
        const double a = GL::abscissa()[k], wk = GL::weights()[k];
        gx.push_back(0.5 * a);
        gw.push_back(0.5 * wk);
        if (a != 0.0) {
            gx.push_back(-0.5 * a);
            gw.push_back(0.5 * wk);
        }
    }
    const int q = int(gx.size());
    const int d = grid.dim;
    std::vector<double> h(d);
    double vol = 1.0;
    for (int a = 0; a < d; ++a) {
        h[a] = grid.spacing(a);
        vol *= h[a];
    }

    // integrates f over the box centered at c with side lengths `side`
    auto box = [&](const Vec& c, const std::vector<double>& side) {
        double sum = 0.0;
        Vec x(d);
        if (d == 1) {
            for (int i = 0; i < q; ++i) {
                x[0] = c[0] + side[0] * gx[i];
                sum += gw[i] * f(x);
            }
        } else {
            for (int i = 0; i < q; ++i)
                for (int j = 0; j < q; ++j) {
                    x[0] = c[0] + side[0] * gx[i];
                    x[1] = c[1] + side[1] * gx[j];
                    sum += gw[i] * gw[j] * f(x);
                }
        }
        return sum;
    };

    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec c = grid.node(i);
        if (!fine || !fine(c, grid.mesh())) {
            out[i] = vol * box(c, h);
            continue;
        }
        std::vector<double> side(d);
        double sub_vol = 1.0;
        for (int a = 0; a < d; ++a) {
            side[a] = h[a] / kSubdivide;
            sub_vol *= side[a];
        }
        double sum = 0.0;
        Vec sc(d);
        const int total = d == 1 ? kSubdivide : kSubdivide * kSubdivide;
        for (int k = 0; k < total; ++k) {
            const int k0 = d == 1 ? k : k / kSubdivide;
            sc[0] = c[0] - 0.5 * h[0] + (k0 + 0.5) * side[0];
            if (d == 2) sc[1] = c[1] - 0.5 * h[1] + (k % kSubdivide + 0.5) * side[1];
            sum += box(sc, side);
        }
        out[i] = sub_vol * sum;
    }
    return out;
}

GridMeasure GridMeasure::from_density(const GridSpec& grid, const std::function<double(const Vec&)>& density) {
    GridMeasure m;
    m.grid = grid;
    m.p = cell_integrals(grid, density);
    const double total = std::accumulate(m.p.begin(), m.p.end(), 0.0);
    if (!(total > 0.0) || !std::isfinite(total)) throw EmptySupport("density has no mass on the grid");
    for (double& x : m.p) x /= total;
    return m;
}

void GridMeasure::validate() const {
    grid.validate();
    if (p.size() != grid.size()) throw GridMismatch("mass vector does not match the grid");
    double total = 0.0;
    for (double x : p) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("cell masses must be finite and nonnegative");
        total += x;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw InvalidArgument("cell masses must sum to 1");
    if (reference) {
        if (reference->size() != grid.size()) throw GridMismatch("reference masses do not match the grid");
        for (double x : *reference)
            if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("reference masses must be nonnegative");
    }
}

double GridMeasure::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < grid.dim; ++a) v *= grid.spacing(a);
    return v;
}

Vec GridMeasure::mean() const {
    Vec m = Vec::Zero(grid.dim);
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) m += p[i] * grid.node(i);
    return m;
}

MuRho mu_rho(const WeightFunction& w, const GridSpec& grid) {
    grid.validate();
    const auto report = check_admissible(w, grid.dim);
    if (!report.admissible) throw NotAdmissible(w.name() + ": " + report.failures.front());

    const double R = w.support_radius();
    std::function<bool(const Vec&, double)> straddles;
    if (std::isfinite(R)) {
        straddles = [&](const Vec& c, double) {
            double near = 0.0, far = 0.0;
            for (int a = 0; a < grid.dim; ++a) {
                const double half = 0.5 * grid.spacing(a);
                const double lo = c[a] - half, hi = c[a] + half;
                const double n_a = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(std::fabs(lo), std::fabs(hi));
                const double f_a = std::max(std::fabs(lo), std::fabs(hi));
                near += n_a * n_a;
                far += f_a * f_a;
            }
            return std::sqrt(near) < R && std::sqrt(far) > R;
        };
    }
    MuRho out;
    out.Z = w.normalization(grid.dim);
    out.measure.grid = grid;
    out.measure.p = cell_integrals(grid, [&](const Vec& x) { return w(x.squaredNorm()); }, straddles);
    const double total = std::accumulate(out.measure.p.begin(), out.measure.p.end(), 0.0);
    if (!(total > 0.0)) throw EmptySupport("mu_rho has no mass on the grid");
    out.captured = total / out.Z;
    for (double& x : out.measure.p) x /= total;
    return out;
}

// ------ discrete measures

void DiscreteMeasure::validate() const {
    if (points.size() != weights.size()) throw InvalidArgument("points and weights differ in length");
    if (points.empty()) throw EmptySupport("discrete measure has no atoms");
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != points.front().size()) throw InvalidArgument("atoms have mixed dimensions");
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) throw InvalidArgument("weights must be nonnegative");
        total += weights[i];
    }
    if (std::fabs(total - 1.0) > 1e-12) throw InvalidArgument("weights must sum to 1");
}

bool DiscreteMeasure::is_symmetric(double point_tol, double weight_tol) const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool found = false;
        for (std::size_t j = 0; j < points.size() && !found; ++j)
            found = (points[i] + points[j]).lpNorm<Eigen::Infinity>() <= point_tol &&
                    std::fabs(weights[i] - weights[j]) <= weight_tol;
        if (!found) return false;
    }
    return true;
}

Vec DiscreteMeasure::mean() const {
    Vec m = Vec::Zero(dim());
    for (std::size_t i = 0; i < points.size(); ++i) m += weights[i] * points[i];
    return m;
}

DiscreteMeasure to_discrete(const GridMeasure& m) {
    DiscreteMeasure d;
    for (std::size_t i = 0; i < m.p.size(); ++i)
        if (m.p[i] > 0.0) {
            d.points.push_back(m.grid.node(i));
            d.weights.push_back(m.p[i]);
        }
    return d;
}

GridMeasure symmetrize(const GridMeasure& m) {
    if (!symmetric_grid(m.grid)) throw NotSymmetric("grid is not symmetric about the origin");
    GridMeasure out = m;
    for (std::size_t i = 0; i < m.p.size(); ++i) out.p[i] = 0.5 * (m.p[i] + m.p[reflected_index(m.grid, i)]);
    return out;
}

bool is_symmetric(const GridMeasure& m, double tol) {
    if (!symmetric_grid(m.grid)) return false;
    for (std::size_t i = 0; i < m.p.size(); ++i)
        if (std::fabs(m.p[i] - m.p[reflected_index(m.grid, i)]) > tol) return false;
    return true;
}

DiscreteMeasure symmetrize(const DiscreteMeasure& m, double point_tol) {
    DiscreteMeasure out;
    auto add = [&](const Vec& x, double w) {
        for (std::size_t j = 0; j < out.points.size(); ++j)
            if ((out.points[j] - x).lpNorm<Eigen::Infinity>() <= point_tol) {
                out.weights[j] += w;
                return;
            }
        out.points.push_back(x);
        out.weights.push_back(w);
    };
    for (std::size_t i = 0; i < m.size(); ++i) {
        add(m.points[i], 0.5 * m.weights[i]);
        add(-m.points[i], 0.5 * m.weights[i]);
    }
    return out;
}

// ------ entropy

double relative_entropy(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw GridMismatch("mass vectors differ in length");
    double h = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return kInf;
        h += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(h, 0.0);
}

double relative_entropy(const GridMeasure& p, const GridMeasure& q) {
    require_same_grid(p.grid, q.grid);
    return relative_entropy(p.p, q.p);
}

double relative_entropy(const GridMeasure& p) {
    if (!p.reference) throw InvalidArgument("measure carries no reference masses");
    const double total = std::accumulate(p.reference->begin(), p.reference->end(), 0.0);
    std::vector<double> q = *p.reference;
    for (double& x : q) x /= total;
    return relative_entropy(p.p, q);
}

double relative_entropy(const DiscreteMeasure& p, const DiscreteMeasure& q, double point_tol) {
    if (p.dim() != q.dim()) throw GridMismatch("measures live in different dimensions");
    double h = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p.weights[i] <= 0.0) continue;
        double qi = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j)
            if ((p.points[i] - q.points[j]).lpNorm<Eigen::Infinity>() <= point_tol) qi += q.weights[j];
        if (qi <= 0.0) return kInf;
        h += p.weights[i] * std::log(p.weights[i] / qi);
    }
    return std::max(h, 0.0);
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw GridMismatch("mass vectors differ in length");
    double tv = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) tv += std::fabs(p[i] - q[i]);
    return 0.5 * tv;
}

// ------ gnomonic projection

Vec gnomonic(const Vec& x) {
    Vec u(x.size() + 1);
    u.head(x.size()) = x;
    u[x.size()] = 1.0;
    return u / std::sqrt(1.0 + x.squaredNorm());
}

Vec gnomonic_inverse(const Vec& u) {
    const Eigen::Index n = u.size() - 1;
    if (!(u[n] > 0.0)) throw EquatorPoint("point is not in the open upper hemisphere");
    return u.head(n) / u[n];
}

DiscreteMeasure gnomonic_push(const DiscreteMeasure& m, Gnomonic direction) {
    DiscreteMeasure out;
    out.weights = m.weights;
    out.points.reserve(m.size());
    for (const auto& x : m.points)
        out.points.push_back(direction == Gnomonic::ToSphere ? gnomonic(x) : gnomonic_inverse(x));
    return out;
}

// ------ I/O

nlohmann::json grid_to_json(const GridSpec& g) {
    return {{"dim", g.dim}, {"lo", g.lo}, {"hi", g.hi}, {"n", g.n}};
}

GridSpec grid_from_json(const nlohmann::json& j) {
    GridSpec g;
    try {
        g.dim = j.at("dim").get<int>();
        g.lo = j.at("lo").get<std::vector<double>>();
        g.hi = j.at("hi").get<std::vector<double>>();
        g.n = j.at("n").get<std::vector<int>>();
        g.validate();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("grid: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ConfigInvalid(std::string("grid: ") + e.what());
    }
    return g;
}

void write_csv(std::ostream& os, const GridMeasure& m) {
    for (int a = 0; a < m.grid.dim; ++a) os << "x" << a << ",";
    os << "mass" << (m.reference ? ",reference" : "") << "\n";
    for (std::size_t i = 0; i < m.p.size(); ++i) {
        const Vec x = m.grid.node(i);
        for (int a = 0; a < m.grid.dim; ++a) os << format_double(x[a]) << ",";
        os << format_double(m.p[i]);
        if (m.reference) os << "," << format_double((*m.reference)[i]);
        os << "\n";
    }
}

void write_csv(std::ostream& os, const DiscreteMeasure& m) {
    for (int a = 0; a < m.dim(); ++a) os << "x" << a << ",";
    os << "mass\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (int a = 0; a < m.dim(); ++a) os << format_double(m.points[i][a]) << ",";
        os << format_double(m.weights[i]) << "\n";
    }
}

DiscreteMeasure read_discrete_csv(std::istream& is) {
    DiscreteMeasure m;
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgument("empty measure CSV");
    const auto columns = std::count(line.begin(), line.end(), ',') + 1;
    if (columns < 2) throw InvalidArgument("measure CSV needs coordinates and a mass column");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (std::ssize(row) != columns) throw InvalidArgument("ragged measure CSV row: " + line);
        m.points.push_back(Eigen::Map<const Vec>(row.data(), columns - 1));
        m.weights.push_back(row.back());
    }
    return m;
}

nlohmann::json sidecar(const GridMeasure& m, const std::optional<WeightFunction>& w, std::optional<double> Z) {
    nlohmann::json j = {{"grid", grid_to_json(m.grid)}, {"has_reference", m.reference.has_value()}};
    j["weight"] = w ? w->to_json() : nlohmann::json(nullptr);
    j["Z"] = Z ? nlohmann::json(*Z) : nlohmann::json(nullptr);
    return j;
}

void write_measure(const std::string& stem, const GridMeasure& m, const std::optional<WeightFunction>& w,
                   std::optional<double> Z) {
    std::ofstream csv(stem + ".csv");
    if (!csv) throw InvalidArgument("cannot write " + stem + ".csv");
    write_csv(csv, m);
    std::ofstream js(stem + ".json");
    if (!js) throw InvalidArgument("cannot write " + stem + ".json");
    js << sidecar(m, w, Z).dump(2) << "\n";
}

}  // namespace santalo::measures

#include "santalo/sconcave.hpp"

#include "santalo/geometry.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace santalo::sconcave {

// ---------------------------------------------------------------- grids

GridSpec GridSpec::line(double a, double b, int nodes) { return {1, {a}, {b}, {nodes}}; }

GridSpec GridSpec::square(double a, double b, int nodes) { return {2, {a, a}, {b, b}, {nodes, nodes}}; }

std::size_t GridSpec::size() const {
    std::size_t s = 1;
    for (int k : n) s *= static_cast<std::size_t>(k);
    return s;
}

double GridSpec::mesh() const {
    double h = 0.0;
    for (int j = 0; j < dim; ++j) h = std::max(h, spacing(j));
    return h;
}

std::vector<int> GridSpec::multi_index(std::size_t index) const {
    std::vector<int> idx(dim);
    for (int j = dim - 1; j >= 0; --j) {
        idx[j] = static_cast<int>(index % n[j]);
        index /= n[j];
    }
    return idx;
}

std::size_t GridSpec::flat_index(const std::vector<int>& idx) const {
    std::size_t k = 0;
    for (int j = 0; j < dim; ++j) k = k * n[j] + idx[j];
    return k;
}

Vec GridSpec::node(std::size_t index) const {
    auto idx = multi_index(index);
    Vec x(dim);
    // endpoints are reproduced exactly
    for (int j = 0; j < dim; ++j)
        x[j] = idx[j] == n[j] - 1 ? hi[j] : lo[j] + idx[j] * spacing(j);
    return x;
}

void GridSpec::validate() const {
    if (dim != 1 && dim != 2) throw InvalidArgument("grid dimension must be 1 or 2");
    if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim || static_cast<int>(n.size()) != dim)
        throw InvalidArgument("grid ranges do not match dimension");
    for (int j = 0; j < dim; ++j) {
        if (!(lo[j] < hi[j]) || !std::isfinite(lo[j]) || !std::isfinite(hi[j]))
            throw InvalidArgument("grid range must be finite and nonempty");
        if (n[j] < 2) throw InvalidArgument("grid needs at least two nodes per axis");
    }
}

GridFunction GridFunction::sample(const GridSpec& grid, const std::function<double(const Vec&)>& f) {
    grid.validate();
    GridFunction g{grid, std::vector<double>(grid.size())};
    for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = f(grid.node(i));
    return g;
}

double GridFunction::max_value() const { return *std::max_element(values.begin(), values.end()); }

void GridFunction::validate() const {
    grid.validate();
    if (values.size() != grid.size()) throw GridMismatch("value count does not match grid");
    bool positive = false;
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("grid values must be finite and nonnegative");
        positive = positive || v > 0.0;
    }
    if (!positive) throw EmptySupport("grid function is identically zero");
}

namespace {

// Multilinear interpolation; zero outside the grid.
double interpolate(const GridFunction& f, const Vec& x) {
    const auto& g = f.grid;
    std::vector<int> base(g.dim);
    std::vector<double> frac(g.dim);
    for (int j = 0; j < g.dim; ++j) {
        double t = (x[j] - g.lo[j]) / g.spacing(j);
        if (t < -1e-12 || t > g.n[j] - 1 + 1e-12) return 0.0;
        t = std::clamp(t, 0.0, static_cast<double>(g.n[j] - 1));
        int i = std::min(static_cast<int>(std::floor(t)), g.n[j] - 2);
        base[j] = i;
        frac[j] = t - i;
    }
    double out = 0.0;
    for (int corner = 0; corner < (1 << g.dim); ++corner) {
        double w = 1.0;
        std::vector<int> idx(base);
        for (int j = 0; j < g.dim; ++j) {
            bool up = corner >> j & 1;
            idx[j] += up;
            w *= up ? frac[j] : 1.0 - frac[j];
        }
        if (w != 0.0) out += w * f.values[g.flat_index(idx)];
    }
    return out;
}

struct Positive {
    std::vector<Vec> x;
    std::vector<double> log_value;
};

Positive positive_nodes(const GridFunction& g) {
    Positive p;
    for (std::size_t i = 0; i < g.values.size(); ++i)
        if (g.values[i] > 0.0) {
            p.x.push_back(g.node(i));
            p.log_value.push_back(std::log(g.values[i]));
        }
    return p;
}

// log L_s g(y) over the positive nodes; -inf encodes a zero value.
double log_ls(const Positive& p, double s, bool zero, const Vec& y) {
    double best = kInf;
    for (std::size_t k = 0; k < p.x.size(); ++k) {
        double t = p.x[k].dot(y);
        double lv;
        if (zero) {
            lv = -t - p.log_value[k];
        } else {
            double a = -s * t;
            if (a <= -1.0) {
                if (s > 0.0) return -kInf;
                continue;
            }
            lv = std::log1p(a) / s - p.log_value[k];
        }
        best = std::min(best, lv);
    }
    return best;
}

}  // namespace

std::vector<double> cell_weights(const GridFunction& f) {
    const auto& g = f.grid;
    std::vector<double> w(f.values.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        auto idx = g.multi_index(i);
        double wi = 1.0;
        for (int j = 0; j < g.dim; ++j) {
            double h = g.spacing(j);
            if (idx[j] == 0 || idx[j] == g.n[j] - 1) h *= 0.5;
            if (f.values[i] > 0.0) {
                bool edge = false;
                for (int d : {-1, 1}) {
                    int k = idx[j] + d;
                    if (k < 0 || k >= g.n[j]) continue;
                    auto nb = idx;
                    nb[j] = k;
                    edge = edge || f.values[g.flat_index(nb)] == 0.0;
                }
                if (edge) h *= 0.5;
            }
            wi *= h;
        }
        w[i] = wi;
    }
    return w;
}

namespace {

// Tail beyond one end of a 1D grid for values decaying like |x|^{-k}.
double power_tail(double x_in, double v_in, double x_end, double v_end) {
    if (v_end == 0.0) return 0.0;
    if (!(v_in > 0.0) || x_in * x_end <= 0.0 || std::fabs(x_end) <= std::fabs(x_in)) return 0.0;
    double k = std::log(v_in / v_end) / std::log(std::fabs(x_end) / std::fabs(x_in));
    if (!(k > 1.0)) throw DivergentIntegral("tail decays no faster than 1/|x|");
    return v_end * std::fabs(x_end) / (k - 1.0);
}

}  // namespace

double integrate(const GridFunction& f, Tail tail) {
    auto w = cell_weights(f);
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] * f.values[i];
    if (tail == Tail::PowerLaw && f.dim() == 1) {
        const auto& v = f.values;
        std::size_t N = v.size();
        sum += power_tail(f.node(1)[0], v[1], f.node(0)[0], v[0]);
        sum += power_tail(f.node(N - 2)[0], v[N - 2], f.node(N - 1)[0], v[N - 1]);
    }
    return sum;
}

Vec barycenter(const GridFunction& f) {
    auto w = cell_weights(f);
    Vec m = Vec::Zero(f.dim());
    double mass = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        double c = w[i] * f.values[i];
        m += c * f.node(i);
        mass += c;
    }
    if (!(mass > 0.0)) throw EmptySupport("zero mass");
    return m / mass;
}

// ---------------------------------------------------------------- I/O

void write_csv(std::ostream& os, const GridFunction& f) {
    os << (f.dim() == 1 ? "x,value\n" : "x,y,value\n");
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        Vec x = f.node(i);
        for (int j = 0; j < f.dim(); ++j) os << format_double(x[j]) << ",";
        os << format_double(f.values[i]) << "\n";
    }
}

GridFunction read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgument("empty grid CSV");
    int cols = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
    int dim = cols - 1;
    if (dim != 1 && dim != 2) throw InvalidArgument("grid CSV must have 2 or 3 columns");
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<double> r;
        std::string cell;
        while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
        if (static_cast<int>(r.size()) != cols) throw InvalidArgument("ragged grid CSV row");
        rows.push_back(std::move(r));
    }
    GridSpec g;
    g.dim = dim;
    for (int j = 0; j < dim; ++j) {
        std::vector<double> c;
        for (const auto& r : rows) c.push_back(r[j]);
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        if (c.size() < 2) throw InvalidArgument("grid CSV axis has fewer than two coordinates");
        g.lo.push_back(c.front());
        g.hi.push_back(c.back());
        g.n.push_back(static_cast<int>(c.size()));
        double h = (c.back() - c.front()) / (c.size() - 1);
        for (std::size_t k = 1; k < c.size(); ++k)
            if (std::fabs(c[k] - c[k - 1] - h) > 1e-9 * std::max(1.0, std::fabs(h)))
                throw InvalidArgument("grid CSV coordinates are not uniformly spaced");
    }
    if (rows.size() != g.size()) throw GridMismatch("grid CSV is not a full rectangular grid");
    GridFunction f{g, std::vector<double>(g.size(), std::nan(""))};
    for (const auto& r : rows) {
        std::vector<int> idx(dim);
        for (int j = 0; j < dim; ++j) idx[j] = static_cast<int>(std::lround((r[j] - g.lo[j]) / g.spacing(j)));
        f.values[g.flat_index(idx)] = r[dim];
    }
    for (double v : f.values)
        if (std::isnan(v)) throw GridMismatch("grid CSV has duplicate nodes");
    return f;
}

namespace {
constexpr char kMagic[4] = {'S', 'L', 'G', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
    T v;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw InvalidArgument("truncated grid binary");
    return v;
}
}  // namespace

// Layout: "SLGF", u32 version, u32 dim, per axis (f64 lo, f64 hi, u64 n),
// then the values as row-major f64, all in host (little-endian) order.
void write_binary(std::ostream& os, const GridFunction& f) {
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(f.dim()));
    for (int j = 0; j < f.dim(); ++j) {
        put<double>(os, f.grid.lo[j]);
        put<double>(os, f.grid.hi[j]);
        put<std::uint64_t>(os, static_cast<std::uint64_t>(f.grid.n[j]));
    }
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

GridFunction read_binary(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw InvalidArgument("not a grid binary");
    if (get<std::uint32_t>(is) != kVersion) throw InvalidArgument("unsupported grid binary version");
    GridSpec g;
    g.dim = static_cast<int>(get<std::uint32_t>(is));
    if (g.dim != 1 && g.dim != 2) throw InvalidArgument("grid binary dimension must be 1 or 2");
    for (int j = 0; j < g.dim; ++j) {
        g.lo.push_back(get<double>(is));
        g.hi.push_back(get<double>(is));
        g.n.push_back(static_cast<int>(get<std::uint64_t>(is)));
    }
    g.validate();
    GridFunction f{g, std::vector<double>(g.size())};
    if (!is.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double))))
        throw InvalidArgument("truncated grid binary payload");
    return f;
}

// ---------------------------------------------------------------- L_s

Regime SParam::regime(int n) const {
    if (!std::isfinite(s)) throw InadmissibleS("s must be finite");
    if (is_zero()) return Regime::Zero;
    if (s > 0.0) return Regime::Positive;
    if (s * n > -1.0) return Regime::NegativeAdmissible;
    throw InadmissibleS("s must exceed -1/n");
}

double s_power(double s, double t) {
    if (std::fabs(s) < 1e-8) return std::exp(-t);
    double a = -s * t;
    if (a <= -1.0) return s > 0.0 ? 0.0 : kInf;
    return std::exp(std::log1p(a) / s);
}

GridFunction ls_transform(const GridFunction& g, SParam s, const GridSpec& target) {
    g.validate();
    target.validate();
    if (target.dim != g.dim()) throw GridMismatch("target grid dimension differs");
    s.regime(g.dim());
    auto p = positive_nodes(g);
    GridFunction out{target, std::vector<double>(target.size())};
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        double lv = log_ls(p, s.s, s.is_zero(), target.node(i));
        if (lv == kInf) throw UnboundedDual("L_s g is infinite on the target grid");
        out.values[i] = std::exp(lv);
    }
    return out;
}

double cs_constant(SParam s, int n) {
    if (n < 1) throw InvalidArgument("dimension must be positive");
    switch (s.regime(n)) {
        case Regime::Zero: return std::pow(2.0 * kPi, n);
        case Regime::Positive: {
            double a = 1.0 + 1.0 / (2.0 * s.s);
            return std::exp(n * std::log(kPi / s.s) + 2.0 * (std::lgamma(a) - std::lgamma(a + n / 2.0)));
        }
        case Regime::NegativeAdmissible: {
            double a = 1.0 / (2.0 * std::fabs(s.s));
            return std::exp(n * std::log(kPi / std::fabs(s.s)) + 2.0 * (std::lgamma(a - n / 2.0) - std::lgamma(a)));
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------- s-Santalo

GridSpec dual_grid(const GridFunction& f, SParam s, int nodes) {
    f.validate();
    const int n = f.dim();
    if (nodes <= 0) nodes = n == 1 ? 401 : 101;
    auto p = positive_nodes(f);
    // inradius of Conv(supp f) about 0 and, for s > 0, the polar bounding box
    double r = kInf;
    std::vector<double> lo(n), hi(n);
    if (n == 1) {
        double a = kInf, b = -kInf;
        for (const auto& x : p.x) {
            a = std::min(a, x[0]);
            b = std::max(b, x[0]);
        }
        if (!(a < 0.0 && b > 0.0)) throw UnboundedDual("0 is not interior to Conv(supp f)");
        r = std::min(-a, b);
        lo[0] = 1.0 / a;
        hi[0] = 1.0 / b;
    } else {
        geometry::ConvexBody hull = geometry::ConvexBody::from_vertices(p.x);
        if (!geometry::contains_origin_interior(hull)) throw UnboundedDual("0 is not interior to Conv(supp f)");
        for (const auto& h : hull.polytope().facets) r = std::min(r, h.offset);
        auto pv = geometry::polar(hull).polytope().vertices;
        for (int j = 0; j < n; ++j) {
            lo[j] = kInf;
            hi[j] = -kInf;
            for (const auto& v : pv) {
                lo[j] = std::min(lo[j], v[j]);
                hi[j] = std::max(hi[j], v[j]);
            }
        }
    }
    GridSpec g;
    g.dim = n;
    g.n.assign(n, nodes);
    if (!s.is_zero()) {
        if (s.s < 0.0) throw InadmissibleS("dual grid is defined for s >= 0");
        for (int j = 0; j < n; ++j) {
            g.lo.push_back(lo[j] / s.s * 1.02);
            g.hi.push_back(hi[j] / s.s * 1.02);
        }
        return g;
    }
    // s = 0: grow a centered box until L_0 f on its boundary is negligible
    const double floor = std::log(1e-14) - std::log(f.max_value());
    double R = 1.0 / r;
    for (int it = 0; it < 60; ++it, R *= 1.5) {
        g.lo.assign(n, -R);
        g.hi.assign(n, R);
        double worst = -kInf;
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto idx = g.multi_index(i);
            bool boundary = false;
            for (int j = 0; j < n; ++j) boundary = boundary || idx[j] == 0 || idx[j] == nodes - 1;
            if (boundary) worst = std::max(worst, log_ls(p, 0.0, true, g.node(i)));
        }
        if (worst <= floor) return g;
    }
    throw UnboundedDual("L_0 f does not decay on any reasonable box");
}

SFunctional s_functional(const GridFunction& dual, SParam s, const Vec& z) {
    const int n = dual.dim();
    if (z.size() != n) throw InvalidArgument("dimension mismatch");
    const bool zero = s.is_zero();
    const double p = zero ? 0.0 : n + 1.0 + 1.0 / s.s;
    auto w = cell_weights(dual);
    SFunctional out;
    out.gradient = Vec::Zero(n);
    out.hessian = Mat::Zero(n, n);
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (dual.values[i] == 0.0) continue;
        Vec x = dual.node(i);
        double c = w[i] * dual.values[i];
        if (zero) {
            double e = c * std::exp(z.dot(x));
            out.value += e;
            out.gradient += e * x;
            out.hessian += e * (x * x.transpose());
        } else {
            double a = 1.0 - s.s * z.dot(x);
            if (!(a > 0.0)) throw PointOutside("1 - s<z,x> vanishes on supp L_s f");
            double e = c * std::pow(a, -p);
            out.value += e;
            out.gradient += e * p * s.s / a * x;
            out.hessian += e * p * (p + 1.0) * s.s * s.s / (a * a) * (x * x.transpose());
        }
    }
    return out;
}

SSantaloResult s_santalo_point(const GridFunction& f, SParam s, double tol, const std::optional<GridSpec>& dual) {
    if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
    f.validate();
    if (s.regime(f.dim()) == Regime::NegativeAdmissible) throw InadmissibleS("s-Santalo point requires s >= 0");
    if (!(interpolate(f, Vec::Zero(f.dim())) > 0.0)) throw NotAdmissible("f(0) must be positive");
    GridSpec grid = dual ? *dual : dual_grid(f, s);
    GridFunction L = ls_transform(f, s, grid);

    auto margin = [&](const Vec& z) {
        if (s.is_zero()) return kInf;
        double m = kInf;
        for (std::size_t i = 0; i < L.values.size(); ++i)
            if (L.values[i] > 0.0) m = std::min(m, 1.0 - s.s * z.dot(L.node(i)));
        return m;
    };

    const int max_iter = 100;
    Vec z = Vec::Zero(f.dim());
    auto d = s_functional(L, s, z);
    for (int it = 0; it < max_iter; ++it) {
        double gn = d.gradient.norm();
        if (gn <= tol) return {z, d.value, it, gn};
        Vec step = -d.hessian.ldlt().solve(d.gradient);
        const double slope = d.gradient.dot(step);
        bool accepted = false;
        double t = 1.0;
        for (int k = 0; k < 60; ++k, t *= 0.5) {
            Vec cand = z + t * step;
            if (!(margin(cand) > 1e-6)) continue;
            auto dc = s_functional(L, s, cand);
            if (dc.value <= d.value + 1e-4 * t * slope || dc.gradient.norm() < gn) {
                z = cand;
                d = dc;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    double gn = d.gradient.norm();
    if (gn <= tol) return {z, d.value, max_iter, gn};
    throw MaxIterations(max_iter, z, "s_santalo_point");
}

Ledger bs_functional_check(const GridFunction& f, SParam s, const std::optional<GridSpec>& dual) {
    f.validate();
    const int n = f.dim();
    if (s.regime(n) == Regime::NegativeAdmissible) throw InadmissibleS("functional Blaschke-Santalo requires s >= 0");
    GridSpec grid = dual ? *dual : dual_grid(f, s);
    GridFunction L = ls_transform(f, s, grid);
    double lhs = integrate(f) * integrate(L);
    // San_s(L_s f) is taken with L_s L_s f resolved back on the grid of f
    Vec z = s_santalo_point(L, s, 1e-8, f.grid).point;
    Vec bar = barycenter(f);
    double c = z.dot(bar);
    double factor = s.is_zero() ? std::exp(-c) : std::pow(1.0 - s.s * c, n + 1.0 + 1.0 / s.s);
    double rhs = cs_constant(s, n) * factor;
    return make_ledger("bs_functional", lhs, rhs, 5e-3 * rhs, "Thm BS-fun-gen: int f int L_s f <= c_s (correction)",
                       "correction factor = " + format_double(factor));
}

// ---------------------------------------------------------------- M transform

bool is_convex(const GridFunction& f, double tol) {
    const auto& g = f.grid;
    double scale = 0.0;
    for (double v : f.values) scale = std::max(scale, std::fabs(v));
    const double slack = tol * std::max(1.0, scale);
    std::vector<std::vector<int>> dirs = g.dim == 1 ? std::vector<std::vector<int>>{{1}}
                                                    : std::vector<std::vector<int>>{{1, 0}, {0, 1}, {1, 1}, {1, -1}};
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        auto idx = g.multi_index(i);
        for (const auto& d : dirs) {
            auto a = idx, b = idx;
            bool inside = true;
            for (int j = 0; j < g.dim; ++j) {
                a[j] -= d[j];
                b[j] += d[j];
                inside = inside && a[j] >= 0 && b[j] >= 0 && a[j] < g.n[j] && b[j] < g.n[j];
            }
            if (!inside) continue;
            if (f.values[g.flat_index(a)] + f.values[g.flat_index(b)] - 2.0 * f.values[i] < -slack) return false;
        }
    }
    return true;
}

namespace {

// Calls fn(inner, outer, j) for consecutive nodes (j-1)p, jp on every ray
// through a node at the origin, p a primitive index step and j >= 2.
// Returns false if the grid has no node at the origin.
template <class Fn>
bool for_each_ray_pair(const GridSpec& g, Fn fn) {
    std::vector<int> c(g.dim);
    for (int j = 0; j < g.dim; ++j) {
        double k = -g.lo[j] / g.spacing(j);
        c[j] = static_cast<int>(std::lround(k));
        if (std::fabs(k - c[j]) > 1e-9 || c[j] < 0 || c[j] >= g.n[j]) return false;
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto idx = g.multi_index(i);
        int d = 0;
        for (int j = 0; j < g.dim; ++j) d = std::gcd(d, std::abs(idx[j] - c[j]));
        if (d < 2) continue;
        auto inner = idx;
        for (int j = 0; j < g.dim; ++j) inner[j] = c[j] + (idx[j] - c[j]) / d * (d - 1);
        fn(g.flat_index(inner), i, d);
    }
    return true;
}

}  // namespace

bool in_class_f(const GridFunction& f, double tol) {
    for (double v : f.values)
        if (!(v > 0.0)) return false;
    if (!is_convex(f, tol)) return false;
    const double slack = tol * f.max_value();
    bool ok = true;
    // f(jp)/j <= f((j-1)p)/(j-1)
    bool rays = for_each_ray_pair(f.grid, [&](std::size_t in, std::size_t out, int j) {
        ok = ok && f.values[out] / j <= f.values[in] / (j - 1) + slack;
    });
    if (rays) return ok;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        Vec x = f.node(i);
        if (x.norm() == 0.0) continue;
        if (2.0 * interpolate(f, 0.5 * x) < f.values[i] - slack) return false;
    }
    return true;
}

bool in_class_cs(const GridFunction& g, SParam s, double tol) {
    if (!(s.s < 0.0) || s.is_zero()) return false;
    const double m = -1.0 / s.s;
    for (double v : g.values)
        if (!(v > 0.0)) return false;
    const double slack = tol * g.max_value();
    bool ok = true;
    // j^m g(jp) >= (j-1)^m g((j-1)p)
    bool rays = for_each_ray_pair(g.grid, [&](std::size_t in, std::size_t out, int j) {
        ok = ok && std::pow(static_cast<double>(j) / (j - 1), m) * g.values[out] >= g.values[in] - slack;
    });
    if (rays) return ok;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        Vec x = g.node(i);
        if (x.norm() == 0.0) continue;
        if (std::pow(0.5, m) * interpolate(g, 0.5 * x) > g.values[i] + slack) return false;
    }
    return true;
}

GridFunction m_transform(const GridFunction& f, const std::optional<GridSpec>& target) {
    f.validate();
    for (double v : f.values)
        if (!(v > 0.0)) throw NonPositive("M transform needs f > 0 on its grid");
    if (!is_convex(f)) throw NotInClass("samples are not convex");
    GridSpec out_grid = target ? *target : f.grid;
    out_grid.validate();
    if (out_grid.dim != f.dim()) throw GridMismatch("target grid dimension differs");
    const std::size_t N = f.values.size();
    std::vector<Vec> xs(N);
    for (std::size_t i = 0; i < N; ++i) xs[i] = f.node(i);
    // 1D: f is continued linearly past the grid ends; along such a ray
    // (1 + xy)/f(x) is monotone, so the sup adds only the limits y/slope.
    double left = 0.0, right = 0.0;
    if (f.dim() == 1) {
        double h = f.grid.spacing(0);
        right = (f.values[N - 1] - f.values[N - 2]) / h;
        left = (f.values[0] - f.values[1]) / h;
    }
    GridFunction out{out_grid, std::vector<double>(out_grid.size())};
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        Vec y = out_grid.node(k);
        double best = -kInf;
        for (std::size_t i = 0; i < N; ++i) best = std::max(best, (1.0 + xs[i].dot(y)) / f.values[i]);
        if (f.dim() == 1) {
            if (right > 0.0) best = std::max(best, y[0] / right);
            if (left > 0.0) best = std::max(best, -y[0] / left);
        }
        out.values[k] = best;
    }
    return out;
}

// ---------------------------------------------------------------- P_s

bool is_unconditional(const GridFunction& g, double tol) {
    const auto& gr = g.grid;
    for (int j = 0; j < gr.dim; ++j)
        if (std::fabs(gr.lo[j] + gr.hi[j]) > 1e-12 * (gr.hi[j] - gr.lo[j])) return false;
    double scale = g.max_value();
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        auto idx = gr.multi_index(i);
        for (int mask = 1; mask < (1 << gr.dim); ++mask) {
            auto m = idx;
            for (int j = 0; j < gr.dim; ++j)
                if (mask >> j & 1) m[j] = gr.n[j] - 1 - m[j];
            if (std::fabs(g.values[gr.flat_index(m)] - g.values[i]) > tol * scale) return false;
        }
    }
    return true;
}

double hanner_bound(SParam s, int n) {
    double b = std::pow(4.0, n);
    for (int k = 1; k <= n; ++k) b /= 1.0 + k * s.s;
    return b;
}

namespace {

constexpr const char* kPsProvenancePos = "Thm thm:s-concave-SR: P_s(g) >= 4^n/((1+s)...(1+ns))";
constexpr const char* kPsProvenanceNeg = "Thm mahler-for-F / eq:Ps-when-negative: P_s(g) >= 4^n/((1+s)...(1+ns))";

void check_ps_hypotheses(const GridFunction& g, SParam s) {
    g.validate();
    Regime r = s.regime(g.dim());
    if (!is_unconditional(g)) throw NotUnconditional("g is not unconditional on its grid");
    if (r == Regime::NegativeAdmissible && !in_class_cs(g, s)) throw NotInClass("g is not in the class C^s");
}

PsResult ps_ledger(double I, double J, double scale, SParam s, int n, const char* name) {
    PsResult r;
    r.integral = I;
    r.dual_integral = J;
    r.value = scale * I * J;
    double bound = hanner_bound(s, n);
    r.ledger = make_ledger(name, bound, r.value, 5e-3 * bound, s.s < 0.0 ? kPsProvenanceNeg : kPsProvenancePos);
    return r;
}

}  // namespace

PsResult ps_functional(const GridFunction& g, SParam s, const std::optional<GridSpec>& target) {
    check_ps_hypotheses(g, s);
    GridFunction L = ls_transform(g, s, target ? *target : g.grid);
    Tail tail = s.s < 0.0 && !s.is_zero() ? Tail::PowerLaw : Tail::None;
    return ps_ledger(integrate(g, tail), integrate(L, tail), 1.0, s, g.dim(), "ps_functional");
}

PsResult ps_functional_m_form(const GridFunction& g, SParam s) {
    check_ps_hypotheses(g, s);
    if (!(s.s < 0.0) || s.is_zero()) throw InadmissibleS("the M-transform form needs s < 0");
    const double m = -1.0 / s.s;
    GridFunction f = g;
    for (double& v : f.values) v = std::pow(v, s.s);
    GridFunction Mf = m_transform(f);
    GridFunction fm = f, Mfm = Mf;
    for (double& v : fm.values) v = std::pow(v, -m);
    for (double& v : Mfm.values) v = std::pow(v, -m);
    return ps_ledger(integrate(fm, Tail::PowerLaw), integrate(Mfm, Tail::PowerLaw), std::pow(m, g.dim()), s, g.dim(),
                     "ps_functional_m_form");
}

// ---------------------------------------------------------------- C(f) moments

namespace {

// Length of {f <= t} for the piecewise-linear interpolant of 1D convex
// samples, continued linearly past both ends.
double sublevel_length(const std::vector<double>& x, const std::vector<double>& v, double left_slope,
                       double right_slope, double t) {
    const std::size_t N = v.size();
    std::size_t lo = N, hi = 0;
    for (std::size_t i = 0; i < N; ++i)
        if (v[i] <= t) {
            lo = std::min(lo, i);
            hi = std::max(hi, i);
        }
    if (lo == N) return 0.0;
    double a, b;
    if (lo == 0) a = x[0] - (t - v[0]) / left_slope;
    else a = x[lo] - (t - v[lo]) / (v[lo - 1] - v[lo]) * (x[lo] - x[lo - 1]);
    if (hi == N - 1) b = x[N - 1] + (t - v[N - 1]) / right_slope;
    else b = x[hi] + (t - v[hi]) / (v[hi + 1] - v[hi]) * (x[hi + 1] - x[hi]);
    return b - a;
}

}  // namespace

Ledger weighted_moment_identity(const GridFunction& f, double m) {
    if (!(m > 0.0)) throw InvalidArgument("m must be positive");
    f.validate();
    if (f.dim() != 1) throw InvalidArgument("the C(f) moment identity is implemented on 1D grids");
    if (!in_class_f(f)) throw NotInClass("f is not in the class F");
    const int n = 1;
    GridFunction p = f;
    for (double& v : p.values) v = std::pow(v, -(m + n));
    double lhs = integrate(p, Tail::PowerLaw);

    const std::size_t N = f.values.size();
    std::vector<double> x(N);
    for (std::size_t i = 0; i < N; ++i) x[i] = f.node(i)[0];
    const auto& v = f.values;
    const double h = f.grid.spacing(0);
    double left = (v[0] - v[1]) / h, right = (v[N - 1] - v[N - 2]) / h;
    if (!(left > 0.0 && right > 0.0)) throw NotInClass("f must increase towards both grid ends");

    // slice of C(f) at height s has length A(s) = s |{f <= 1/s}|;
    // with s = u^{1/m}, int_0 s^{m-1} A(s) ds = (1/m) int_0 A(u^{1/m}) du
    auto A = [&](double u) {
        double s = std::pow(u, 1.0 / m);
        return s * sublevel_length(x, v, left, right, 1.0 / s);
    };
    const double vmin = *std::min_element(v.begin(), v.end());
    std::vector<double> breaks{0.0};
    for (double vi : v) breaks.push_back(std::pow(1.0 / vi, m));
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    const double umax = std::pow(1.0 / vmin, m);
    using GL = boost::math::quadrature::gauss<double, 20>;
    double region = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        double a = breaks[k], b = std::min(breaks[k + 1], umax);
        if (b > a) region += GL::integrate(A, a, b);
    }
    double rhs = (m + n) / m * region;
    return make_ledger("weighted_moment_identity", lhs, rhs, 1e-3 * std::fabs(lhs),
                       "Thm thm:C(f) (v): int f^{-(m+n)} = ((m+n)/2) int_{C(f)} |s|^{m-1}");
}

}  // namespace santalo::sconcave

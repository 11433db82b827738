#include "santalo/sphere.hpp"

#include "santalo/transport.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace santalo::sphere {

namespace {

constexpr double kOrthogonalAngle = 1e-6;

double angle(const Vec& u, const Vec& v) { return std::acos(std::clamp(u.dot(v), -1.0, 1.0)); }

// Index of the node closest to x; the grids are small enough for a scan.
int find_node(const std::vector<Vec>& nodes, const Vec& x) {
    int best = -1;
    double bd = kInf;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double d = (nodes[i] - x).squaredNorm();
        if (d < bd) {
            bd = d;
            best = int(i);
        }
    }
    return best;
}

void finish_grid(SphereGrid& g) {
    const std::size_t N = g.nodes.size();
    g.antipode.resize(N);
    g.mirror.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        Vec m = g.nodes[i];
        m[g.n] = -m[g.n];
        g.antipode[i] = find_node(g.nodes, -g.nodes[i]);
        g.mirror[i] = find_node(g.nodes, m);
        if ((g.nodes[g.antipode[i]] + g.nodes[i]).norm() > 1e-12 || (g.nodes[g.mirror[i]] - m).norm() > 1e-12)
            throw InvalidArgument("sphere grid is not closed under the symmetries");
    }
    // average each weight over its symmetry orbit so the closure is exact
    std::vector<double> w(N);
    for (std::size_t i = 0; i < N; ++i) {
        const int a = g.antipode[i], m = g.mirror[i], am = g.mirror[a];
        std::array<double, 4> orbit{g.weights[i], g.weights[a], g.weights[m], g.weights[am]};
        std::sort(orbit.begin(), orbit.end());  // same rounding for every orbit member
        w[i] = 0.25 * (orbit[0] + orbit[1] + orbit[2] + orbit[3]);
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x /= total;
    g.weights = std::move(w);

    g.mesh = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double best = kInf;
        for (std::size_t j = 0; j < N; ++j)
            if (j != i) best = std::min(best, angle(g.nodes[i], g.nodes[j]));
        g.mesh = std::max(g.mesh, best);
    }
}

double triangle_area(const Vec& a, const Vec& b, const Vec& c) {
    const double num = std::fabs(a.dot(Eigen::Vector3d(b).cross(Eigen::Vector3d(c))));
    const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    return 2.0 * std::atan2(num, den);
}

}  // namespace

// ------ grids

SphereGrid SphereGrid::circle(int half_count) {
    if (half_count < 2 || half_count > 2048) throw InvalidArgument("circle grid needs 2 <= N <= 2048");
    SphereGrid g;
    g.n = 1;
    const int N = 2 * half_count;
    for (int k = 0; k < N; ++k) {
        const double t = (k + 0.5) * kPi / half_count;
        Vec u(2);
        u << std::cos(t), std::sin(t);
        g.nodes.push_back(u);
        g.weights.push_back(1.0 / N);
    }
    g.spec = {{"type", "circle"}, {"half_count", half_count}};
    finish_grid(g);
    return g;
}

SphereGrid SphereGrid::icosahedral(int level) {
    if (level < 0 || level > 4) throw InvalidArgument("icosahedral grid needs 0 <= level <= 4");
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    std::vector<Vec> v;
    for (double a : {-1.0, 1.0})
        for (double b : {-phi, phi}) {
            Vec p(3);
            p << 0, a, b;
            v.push_back(p);
            p << a, b, 0;
            v.push_back(p);
            p << b, 0, a;
            v.push_back(p);
        }
    // faces are the vertex triples at mutual distance 2
    std::vector<std::array<int, 3>> faces;
    auto edge = [&](int i, int j) { return std::fabs((v[i] - v[j]).norm() - 2.0) < 1e-9; };
    for (int i = 0; i < 12; ++i)
        for (int j = i + 1; j < 12; ++j)
            for (int k = j + 1; k < 12; ++k)
                if (edge(i, j) && edge(j, k) && edge(i, k)) faces.push_back({i, j, k});
    for (auto& p : v) p.normalize();

    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            return mid[key] = int(v.size()) - 1;
        };
        std::vector<std::array<int, 3>> next;
        for (const auto& f : faces) {
            const int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    SphereGrid g;
    g.n = 2;
    g.nodes = v;
    g.weights.assign(v.size(), 0.0);
    for (const auto& f : faces) {
        const Vec c = (v[f[0]] + v[f[1]] + v[f[2]]).normalized();
        for (int e = 0; e < 3; ++e) {
            const Vec& a = v[f[e]];
            const Vec m1 = (a + v[f[(e + 1) % 3]]).normalized();
            const Vec m2 = (a + v[f[(e + 2) % 3]]).normalized();
            g.weights[f[e]] += triangle_area(a, m1, c) + triangle_area(a, c, m2);
        }
    }
    g.spec = {{"type", "icosahedral"}, {"level", level}};
    finish_grid(g);
    return g;
}

double SphereGrid::integrate(const std::function<double(const Vec&)>& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
}

void SphereGrid::validate() const {
    if (n != 1 && n != 2) throw InvalidArgument("sphere grids exist for n = 1, 2");
    if (nodes.size() != weights.size() || antipode.size() != nodes.size() || mirror.size() != nodes.size())
        throw InvalidArgument("sphere grid arrays differ in length");
    double total = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].size() != n + 1 || std::fabs(nodes[i].norm() - 1.0) > 1e-12)
            throw NotUnit("sphere grid node is not a unit vector");
        if (!(weights[i] > 0.0)) throw InvalidArgument("sphere grid weights must be positive");
        total += weights[i];
    }
    if (std::fabs(total - 1.0) > 1e-12) throw InvalidArgument("sphere grid weights do not sum to 1");
}

SphereGrid grid_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type")) throw ConfigInvalid("sphere grid: expected {\"type\": ...}");
    const std::string type = j.value("type", "");
    try {
        if (type == "circle") return SphereGrid::circle(j.at("half_count").get<int>());
        if (type == "icosahedral") return SphereGrid::icosahedral(j.at("level").get<int>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("sphere grid: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ConfigInvalid(std::string("sphere grid: ") + e.what());
    }
    throw ConfigInvalid("sphere grid: unknown type \"" + type + "\"");
}

void write_csv(std::ostream& os, const SphereGrid& g) {
    for (int a = 0; a <= g.n; ++a) os << "x" << a << ",";
    os << "weight\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (int a = 0; a <= g.n; ++a) os << format_double(g.nodes[i][a]) << ",";
        os << format_double(g.weights[i]) << "\n";
    }
}

// ------ measures on the sphere

SphericalMeasure SphericalMeasure::from_density(const SphereGrid& g, const std::function<double(const Vec&)>& density) {
    SphericalMeasure m;
    m.points = g.nodes;
    m.weights.resize(g.size());
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double f = density(g.nodes[i]);
        if (!(f >= 0.0) || !std::isfinite(f)) throw InvalidArgument("density must be finite and nonnegative");
        total += (m.weights[i] = f * g.weights[i]);
    }
    if (!(total > 0.0)) throw DegenerateInput("density integrates to zero");
    for (auto& x : m.weights) x /= total;
    return m;
}

SphericalMeasure SphericalMeasure::uniform(const SphereGrid& g) { return {g.nodes, g.weights}; }

bool SphericalMeasure::is_symmetric(double point_tol, double weight_tol) const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool found = false;
        for (std::size_t j = 0; j < points.size() && !found; ++j)
            found = (points[j] + points[i]).norm() <= point_tol && std::fabs(weights[j] - weights[i]) <= weight_tol;
        if (!found) return false;
    }
    return true;
}

void SphericalMeasure::validate() const {
    if (points.empty() || points.size() != weights.size()) throw InvalidArgument("spherical measure needs atoms");
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != points.front().size()) throw InvalidArgument("atoms differ in dimension");
        if (std::fabs(points[i].norm() - 1.0) > 1e-10) throw NotUnit("atom is not a unit vector");
        if (!(weights[i] >= 0.0)) throw InvalidArgument("atom masses must be nonnegative");
        total += weights[i];
    }
    if (std::fabs(total - 1.0) > 1e-10) throw InvalidArgument("spherical measure does not have total mass 1");
}

double relative_entropy(const SphereGrid& g, const SphericalMeasure& nu) {
    if (nu.size() != g.size()) throw GridMismatch("measure is not carried by the grid nodes");
    double h = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if ((nu.points[i] - g.nodes[i]).norm() > 1e-12) throw GridMismatch("measure is not carried by the grid nodes");
        if (nu.weights[i] > 0.0) h += nu.weights[i] * std::log(nu.weights[i] / g.weights[i]);
    }
    return h;
}

// ------ cone measures

ConeMeasure cone_measure(const ConvexBody& C_in, bool auto_rescale) {
    if (!C_in.is_polytope()) throw InvalidArgument("cone measures are computed for polytopes");
    if (!geometry::is_symmetric(C_in)) throw NotSymmetric("cone measure needs a symmetric body");
    const ConvexBody C = std::fabs(C_in.volume() - 1.0) <= 1e-9 ? C_in
                         : auto_rescale                          ? geometry::normalize_volume(C_in)
                                                                 : throw NotUnitVolume("body volume is not 1");
    const auto& P = C.polytope();
    const auto areas = geometry::facet_areas(P);
    ConeMeasure cm;
    double total = 0.0;
    for (std::size_t f = 0; f < P.facets.size(); ++f) {
        cm.normals.push_back(P.facets[f].normal);
        cm.masses.push_back(P.facets[f].offset * areas[f] / (P.dim * C.volume()));
        total += cm.masses.back();
    }
    for (auto& m : cm.masses) m /= total;
    return cm;
}

std::vector<double> cone_measure_monte_carlo(const ConvexBody& C, long samples, Rng& rng) {
    const auto& P = C.polytope();
    const int d = P.dim;
    Vec lo = Vec::Constant(d, kInf), hi = Vec::Constant(d, -kInf);
    for (const auto& v : P.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    std::vector<double> freq(P.facets.size(), 0.0);
    Vec x(d);
    for (long accepted = 0; accepted < samples;) {
        for (int a = 0; a < d; ++a) x[a] = rng.uniform(lo[a], hi[a]);
        int best = -1;
        double gauge = -kInf;
        for (std::size_t f = 0; f < P.facets.size(); ++f) {
            const double r = P.facets[f].normal.dot(x) / P.facets[f].offset;
            if (r > gauge) {
                gauge = r;
                best = int(f);
            }
        }
        if (gauge > 1.0) continue;
        freq[best] += 1.0;
        ++accepted;
    }
    for (auto& f : freq) f /= double(samples);
    return freq;
}

// ------ subspace concentration

std::string to_string(ConcentrationStatus s) {
    switch (s) {
    case ConcentrationStatus::Strict: return "strict";
    case ConcentrationStatus::Equality: return "equality";
    case ConcentrationStatus::Violated: return "violated";
    }
    return "";
}

namespace {

Mat orthonormal_basis(const Mat& A, double tol = 1e-9) {
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullU);
    int r = 0;
    const double scale = std::max(1.0, svd.singularValues().size() ? svd.singularValues()[0] : 0.0);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > tol * scale) ++r;
    return svd.matrixU().leftCols(r);
}

Mat columns(const std::vector<Vec>& pts, const std::vector<int>& idx) {
    Mat A(pts.front().size(), Eigen::Index(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) A.col(Eigen::Index(c)) = pts[idx[c]];
    return A;
}

bool in_span(const Mat& Q, const Vec& p, double tol = 1e-9) { return (p - Q * (Q.transpose() * p)).norm() <= tol; }

}  // namespace

SubspaceReport subspace_concentration_check(const SphericalMeasure& nu, double tol) {
    nu.validate();
    const int d = nu.ambient_dim();
    const int N = int(nu.size());
    SubspaceReport rep;
    rep.max_mass.assign(d - 1, 0.0);
    rep.slack.assign(d - 1, 0.0);
    std::vector<int> support;
    for (int i = 0; i < N; ++i)
        if (nu.weights[i] > 0.0) support.push_back(i);

    bool violated = false, equality = false;
    for (int k = 1; k < d; ++k) {
        const double bound = double(k) / d;
        std::vector<int> pick(k);
        std::iota(pick.begin(), pick.end(), 0);
        const int S = int(support.size());
        while (k <= S) {
            std::vector<int> idx(k);
            for (int c = 0; c < k; ++c) idx[c] = support[pick[c]];
            const Mat Q = orthonormal_basis(columns(nu.points, idx));
            if (Q.cols() == k) {
                double mass = 0.0;
                std::vector<int> outside;
                for (int i : support) {
                    if (in_span(Q, nu.points[i])) mass += nu.weights[i];
                    else outside.push_back(i);
                }
                rep.max_mass[k - 1] = std::max(rep.max_mass[k - 1], mass);
                if (mass > bound + tol && !violated) {
                    violated = true;
                    rep.witness = Q;
                    rep.detail = "subspace of dimension " + std::to_string(k) + " carries " + format_double(mass) +
                                 " > " + format_double(bound);
                } else if (std::fabs(mass - bound) <= tol && !violated) {
                    // complementary clause: the atoms off F must span a
                    // complement of dimension d - k
                    const Mat G = outside.empty() ? Mat(d, 0) : orthonormal_basis(columns(nu.points, outside));
                    Mat FG(d, Q.cols() + G.cols());
                    FG << Q, G;
                    if (G.cols() != d - k || orthonormal_basis(FG).cols() != d) {
                        violated = true;
                        rep.witness = Q;
                        rep.detail = "equality on a subspace of dimension " + std::to_string(k) +
                                     " without a complementary subspace";
                    } else if (!equality) {
                        equality = true;
                        rep.witness = Q;
                        rep.detail = "equality on a subspace of dimension " + std::to_string(k) +
                                     " with complementary subspace";
                    }
                }
            }
            int c = k - 1;
            while (c >= 0 && pick[c] == S - k + c) --c;
            if (c < 0) break;
            ++pick[c];
            for (int e = c + 1; e < k; ++e) pick[e] = pick[e - 1] + 1;
        }
        rep.slack[k - 1] = bound - rep.max_mass[k - 1];
    }
    rep.status = violated ? ConcentrationStatus::Violated
                 : equality ? ConcentrationStatus::Equality
                            : ConcentrationStatus::Strict;
    return rep;
}

double phi_nu(const SphericalMeasure& nu, const ConvexBody& C) {
    if (!geometry::contains_origin_interior(C)) throw OriginNotInterior("Phi_nu needs 0 in int(C)");
    double s = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i)
        if (nu.weights[i] > 0.0) s += nu.weights[i] * std::log(geometry::support_function(C, nu.points[i]));
    return s;
}

// ------ log-Minkowski problem

namespace {

struct LmState {
    std::vector<double> x;       // log h
    std::vector<double> lambda;  // cone masses per atom
    double volume = 0.0;
    double phi = 0.0;  // scale-invariant sum nu log h - log|C| / d
};

LmState lm_evaluate(const SphericalMeasure& nu, std::vector<double> x) {
    const int d = nu.ambient_dim();
    std::vector<geometry::Halfspace> hs;
    for (std::size_t i = 0; i < x.size(); ++i) hs.push_back({nu.points[i], std::exp(x[i])});
    const auto P = geometry::polytope_from_halfspaces(d, hs);
    const auto areas = geometry::facet_areas(P);
    LmState s;
    s.volume = P.volume;
    s.lambda.assign(x.size(), 0.0);
    for (std::size_t f = 0; f < P.facets.size(); ++f) {
        const int i = find_node(nu.points, P.facets[f].normal);
        s.lambda[i] += P.facets[f].offset * areas[f] / (d * P.volume);
    }
    const double shift = std::log(P.volume) / d;
    for (auto& xi : x) xi -= shift;
    s.x = std::move(x);
    s.phi = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) s.phi += nu.weights[i] * s.x[i];
    return s;
}

double tv(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    return 0.5 * s;
}

ConvexBody body_from_support(const SphericalMeasure& nu, const std::vector<double>& h) {
    std::vector<geometry::Halfspace> hs;
    for (std::size_t i = 0; i < h.size(); ++i) hs.push_back({nu.points[i], h[i]});
    return ConvexBody::from_halfspaces(std::move(hs));
}

}  // namespace

LogMinkowskiResult log_minkowski_solve(const SphericalMeasure& nu, const LogMinkowskiOptions& opt) {
    nu.validate();
    if (!nu.is_symmetric()) throw NotSymmetric("log-Minkowski solver needs a symmetric measure");
    const auto rep = subspace_concentration_check(nu);
    if (rep.status == ConcentrationStatus::Violated) throw NotConcentrated(rep.detail);
    std::string warning;
    if (rep.status == ConcentrationStatus::Equality)
        warning = "subspace concentration holds with equality (" + rep.detail + "); minimizers need not be unique";

    const std::size_t N = nu.size();
    std::vector<int> anti(N);
    for (std::size_t i = 0; i < N; ++i) anti[i] = find_node(nu.points, -nu.points[i]);

    std::vector<double> x(N, 0.0);
    if (!opt.initial_h.empty()) {
        if (opt.initial_h.size() != N) throw InvalidArgument("initial_h needs one support number per atom");
        for (std::size_t i = 0; i < N; ++i) {
            if (!(opt.initial_h[i] > 0.0)) throw InvalidArgument("support numbers must be positive");
            x[i] = std::log(opt.initial_h[i]);
        }
    }
    for (std::size_t i = 0; i < N; ++i)
        if (anti[i] > int(i)) x[i] = x[anti[i]] = 0.5 * (x[i] + x[anti[i]]);

    LmState s = lm_evaluate(nu, x);
    double step = 1.0;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        if (tv(s.lambda, nu.weights) <= opt.tol) break;
        std::vector<double> g(N);
        double g2 = 0.0;
        // averaging over antipodal pairs keeps the iterate symmetric; off
        // that subspace Phi is unbounded as the origin nears a facet
        for (std::size_t i = 0; i < N; ++i)
            g[i] = nu.weights[i] - 0.5 * (s.lambda[i] + s.lambda[anti[i]]);
        for (std::size_t i = 0; i < N; ++i) g2 += g[i] * g[i];
        bool accepted = false;
        for (; step > 1e-14; step *= 0.5) {
            std::vector<double> y(N);
            for (std::size_t i = 0; i < N; ++i) y[i] = 0.5 * (s.x[i] + s.x[anti[i]]) - step * g[i];
            LmState t = lm_evaluate(nu, y);
            if (t.phi <= s.phi - 1e-4 * step * g2) {
                s = std::move(t);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        step = std::min(8.0, 2.0 * step);
    }
    const double residual = tv(s.lambda, nu.weights);
    std::vector<double> h(N);
    for (std::size_t i = 0; i < N; ++i) h[i] = std::exp(s.x[i]);
    if (residual > opt.tol) {
        Vec best(static_cast<Eigen::Index>(N));
        for (std::size_t i = 0; i < N; ++i) best[Eigen::Index(i)] = h[i];
        throw MaxIterations(it, best, "log-Minkowski descent (residual " + format_double(residual) + ")");
    }
    return LogMinkowskiResult{body_from_support(nu, h), h, residual, it, warning};
}

// ------ K functional

std::vector<double> eta_density(const ConvexBody& C, const SphereGrid& g) {
    const int d = g.ambient_dim();
    if (C.dim() != d) throw InvalidArgument("body and sphere grid differ in dimension");
    const double B = unit_ball_volume(d);
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = B * std::pow(geometry::radial_function(C, g.nodes[i]), d);
    return f;
}

double polar_volume_product(const ConvexBody& C, const SphereGrid& g) {
    const int d = g.ambient_dim();
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        a += g.weights[i] * std::pow(geometry::radial_function(C, g.nodes[i]), d);
        b += g.weights[i] * std::pow(geometry::support_function(C, g.nodes[i]), -d);
    }
    return a * b;
}

double transport_alpha(const SphericalMeasure& a, const SphericalMeasure& b, double margin) {
    SphericalMeasure x, y;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.weights[i] > 0.0) x.points.push_back(a.points[i]), x.weights.push_back(a.weights[i]);
    for (std::size_t i = 0; i < b.size(); ++i)
        if (b.weights[i] > 0.0) y.points.push_back(b.points[i]), y.weights.push_back(b.weights[i]);
    const auto c = transport::cost_alpha(x.points, y.points, margin);
    const auto r = transport::solve_exact(c, x.weights, y.weights);
    return r.status == transport::SolveStatus::Infeasible ? kInf : r.plan.objective;
}

KFunctionalResult k_functional(const SphericalMeasure& nu, const std::vector<ConvexBody>& bodies, const SphereGrid& grid,
                               const std::vector<std::vector<double>>& extra) {
    nu.validate();
    const int d = nu.ambient_dim();
    const double logB = std::log(unit_ball_volume(d)) / d;
    KFunctionalResult r;
    r.tolerance = 1e-9;

    const auto rep = subspace_concentration_check(nu);
    if (rep.status == ConcentrationStatus::Violated) {
        // A_t = t on F and t^{-k/(d-k)} on its complement keeps |A_t B| = |B|
        // while Phi falls like (d nu(F) - k)/(d - k) log t
        r.unbounded = true;
        const Mat P = rep.witness * rep.witness.transpose();
        const int k = int(rep.witness.cols());
        for (double t : {1e-1, 1e-2, 1e-4, 1e-8}) {
            const Mat A = t * P + std::pow(t, -double(k) / (d - k)) * (Mat::Identity(d, d) - P);
            double phi = -logB;
            for (std::size_t i = 0; i < nu.size(); ++i)
                if (nu.weights[i] > 0.0) phi += nu.weights[i] * std::log((A * nu.points[i]).norm());
            r.descent.push_back(phi);
        }
        r.upper = r.lower = -kInf;
        return r;
    }

    std::vector<std::vector<double>> etas;
    for (std::size_t b = 0; b < bodies.size(); ++b) {
        const ConvexBody C = geometry::normalize_volume(bodies[b]);
        const double phi = phi_nu(nu, C);
        if (phi < r.upper) {
            r.upper = phi;
            r.best_body = int(b);
        }
        etas.push_back(eta_density(C, grid));
        r.tolerance += std::fabs(std::log(grid.integrate([&](const Vec& u) {
                           return unit_ball_volume(d) * std::pow(geometry::radial_function(C, u), d);
                       }))) / d;
    }
    for (const auto& e : extra) etas.push_back(e);
    for (std::size_t e = 0; e < etas.size(); ++e) {
        if (etas[e].size() != grid.size()) throw GridMismatch("eta density does not match the grid");
        SphericalMeasure eta{grid.nodes, std::vector<double>(grid.size())};
        double total = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) total += (eta.weights[i] = etas[e][i] * grid.weights[i]);
        for (auto& w : eta.weights) w /= total;
        const double F = relative_entropy(grid, eta) / d - transport_alpha(nu, eta, std::sin(kOrthogonalAngle));
        if (F - logB < r.lower) {
            r.lower = F - logB;
            r.best_eta = int(e);
        }
    }
    r.consistent = r.upper >= r.lower - r.tolerance;
    return r;
}

// ------ transport-entropy ledgers

Ledger kolesnikov_check(const SphereGrid& g, const SphericalMeasure& nu1, const SphericalMeasure& nu2) {
    const std::string name = "kolesnikov/S^" + std::to_string(g.n);
    const std::string prov =
        "Thm Kolesnikovsym: (n+1) T_alpha(nu1,nu2) <= H(nu1|sigma)+H(nu2|sigma), nu1, nu2 symmetric";
    nu1.validate();
    nu2.validate();
    if (!nu1.is_symmetric()) return skipped_ledger(name, "hypothesis: nu1 is not symmetric", prov);
    if (!nu2.is_symmetric()) return skipped_ledger(name, "hypothesis: nu2 is not symmetric", prov);
    const double h1 = relative_entropy(g, nu1), h2 = relative_entropy(g, nu2);

    std::vector<Vec> X, Y;
    std::vector<double> p, q;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (nu1.weights[i] > 0.0) X.push_back(g.nodes[i]), p.push_back(nu1.weights[i]);
        if (nu2.weights[i] > 0.0) Y.push_back(g.nodes[i]), q.push_back(nu2.weights[i]);
    }
    const auto cost = transport::cost_alpha(X, Y, std::sin(kOrthogonalAngle));
    const auto res = transport::solve_exact(cost, p, q);
    if (res.status == transport::SolveStatus::Infeasible)
        return skipped_ledger(name, "Infeasible: no finite-cost coupling of the node atoms (T = +inf)", prov);
    const int d = g.ambient_dim();
    double lip = 0.0;
    for (const auto& e : res.plan.entries) lip = std::max(lip, std::tan(angle(X[e.i], Y[e.j])));
    const double slack = d * g.mesh * lip;
    const double T = res.plan.objective;
    std::ostringstream note;
    note << "T=" << format_double(T) << " H1=" << format_double(h1) << " H2=" << format_double(h2)
         << " slack_transport=" << format_double(slack) << " mesh=" << format_double(g.mesh);
    return make_ledger(name, d * T, h1 + h2, 1e-6 + slack, prov, note.str());
}

IdentityTerms mahler_identity(const ConvexBody& C) {
    const int d = C.dim();
    const ConvexBody C1 = geometry::normalize_volume(C);
    const ConvexBody C2 = geometry::normalize_volume(geometry::polar(C));
    const auto nu1 = cone_measure(C1).measure(), nu2 = cone_measure(C2).measure();
    IdentityTerms t;
    t.transport = d * transport_alpha(nu1, nu2);
    for (std::size_t i = 0; i < nu1.size(); ++i)
        t.h_term += nu1.weights[i] * d * std::log(geometry::support_function(C1, nu1.points[i]));
    for (std::size_t i = 0; i < nu2.size(); ++i)
        t.rho_term += nu2.weights[i] * d * std::log(geometry::radial_function(C1, nu2.points[i]));
    return t;
}

namespace {

// H(eta_C | sigma) and (n+1)/2 int log(1 + |grad V|^2/(n+1)^2) e^{-V} dsigma.
// On the cone over facet (a, b), rho = b / (a.u) and the integrand is
// -2 log(a.u); nodes where two facets tie are dropped.
std::pair<double, double> lsi_terms(const ConvexBody& C, const SphereGrid& g) {
    const int d = g.ambient_dim();
    const auto& P = C.polytope();
    const double B = unit_ball_volume(d);
    double H = 0.0, R = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec& u = g.nodes[i];
        double top = -kInf, second = -kInf;
        int best = -1;
        for (std::size_t f = 0; f < P.facets.size(); ++f) {
            const double r = P.facets[f].normal.dot(u) / P.facets[f].offset;
            if (r > top) {
                second = top;
                top = r;
                best = int(f);
            } else if (r > second) {
                second = r;
            }
        }
        const double fd = B * std::pow(1.0 / top, d);
        H += g.weights[i] * fd * std::log(fd);
        if (top - second <= 1e-12 * top) continue;
        R += g.weights[i] * fd * 0.5 * d * (-2.0 * std::log(P.facets[best].normal.dot(u)));
    }
    return {H, R};
}

}  // namespace

Ledger lsi_unconditional_check(const ConvexBody& C1, const ConvexBody& C2, const SphereGrid& g, double tol) {
    const int d = g.ambient_dim();
    const std::string name = "lsi-unconditional/R^" + std::to_string(d);
    const std::string prov =
        "Thm LSIimproved-unconditional: H(eta_C1|sigma)+H(eta_C2|sigma)+(n+1)T_alpha(nu_C1,nu_C2) <= e_{n+1} + "
        "sum_i (n+1)/2 int log(1+|grad V_i|^2/(n+1)^2) e^{-V_i} dsigma";
    for (const auto* C : {&C1, &C2}) {
        if (C->dim() != d) throw InvalidArgument("bodies and sphere grid differ in dimension");
        if (!C->is_polytope()) throw InvalidArgument("lsi_unconditional_check needs polytopes");
        if (std::fabs(C->volume() - 1.0) > 1e-9) throw NotUnitVolume("lsi_unconditional_check needs |C_i| = 1");
        if (!geometry::is_unconditional(*C)) return skipped_ledger(name, "hypothesis: body is not unconditional", prov);
    }
    const auto [H1, R1] = lsi_terms(C1, g);
    const auto [H2, R2] = lsi_terms(C2, g);
    const auto nu1 = cone_measure(C1).measure(), nu2 = cone_measure(C2).measure();
    const double T = d * transport_alpha(nu1, nu2);
    const double e = std::log(factorial(d) * std::pow(unit_ball_volume(d), 2) / std::pow(4.0, d));

    double h_term = 0.0, rho_term = 0.0;
    for (std::size_t i = 0; i < nu1.size(); ++i)
        h_term += nu1.weights[i] * d * std::log(geometry::support_function(C1, nu1.points[i]));
    for (std::size_t i = 0; i < nu2.size(); ++i)
        rho_term += nu2.weights[i] * d * std::log(geometry::radial_function(C1, nu2.points[i]));
    std::ostringstream note;
    note << "H1=" << format_double(H1) << " H2=" << format_double(H2) << " transport=" << format_double(T)
         << " e=" << format_double(e) << " R1=" << format_double(R1) << " R2=" << format_double(R2)
         << " h_term=" << format_double(h_term) << " rho_term=" << format_double(rho_term);
    return make_ledger(name, H1 + H2 + T, e + R1 + R2, tol, prov, note.str());
}

Ledger improved_mahler_check(const ConvexBody& C, double tol) {
    const int d = C.dim();
    const std::string name = "improved-mahler/R^" + std::to_string(d);
    const std::string prov =
        "Thm LSItoMahler (b): |C||C°| >= 4^{n+1}/(n+1)! exp((n+1)T_alpha(nu_C1,nu_C2) + int log h_C1^{n+1} dnu_C1 "
        "- int log rho_C1^{n+1} dnu_C2), C unconditional";
    if (!C.is_polytope()) throw InvalidArgument("improved_mahler_check needs a polytope");
    if (!geometry::is_unconditional(C)) return skipped_ledger(name, "hypothesis: body is not unconditional", prov);
    const auto t = mahler_identity(C);
    const double product = C.volume() * geometry::polar(C).volume();
    std::ostringstream note;
    note << "transport=" << format_double(t.transport) << " h_term=" << format_double(t.h_term)
         << " rho_term=" << format_double(t.rho_term) << " identity=" << format_double(t.value());
    return make_ledger(name, std::pow(4.0, d) / factorial(d) * std::exp(t.value()), product, tol, prov, note.str());
}

// ------ concentration

namespace {

void check_mask(const SphereGrid& g, const std::vector<bool>& m) {
    if (m.size() != g.size()) throw InvalidArgument("node mask does not match the grid");
    if (std::none_of(m.begin(), m.end(), [](bool b) { return b; })) throw EmptySet("node set is empty");
}

bool mask_symmetric(const SphereGrid& g, const std::vector<bool>& m) {
    for (std::size_t i = 0; i < g.size(); ++i)
        if (m[i] != m[g.antipode[i]]) return false;
    return true;
}

double mask_mass(const SphereGrid& g, const std::vector<bool>& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (m[i]) s += g.weights[i];
    return s;
}

// geodesic distance from every node to the set
std::vector<double> distance_to(const SphereGrid& g, const std::vector<bool>& m) {
    std::vector<int> members;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (m[i]) members.push_back(int(i));
    std::vector<double> out(g.size(), kInf);
    for (std::size_t i = 0; i < g.size(); ++i)
        for (int j : members) out[i] = std::min(out[i], angle(g.nodes[i], g.nodes[j]));
    return out;
}

}  // namespace

std::vector<bool> symmetric_cap(const SphereGrid& g, const Vec& center, double radius) {
    const Vec c = center.normalized();
    std::vector<bool> m(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        m[i] = angle(g.nodes[i], c) <= radius || angle(g.nodes[i], -c) <= radius;
    return m;
}

Ledger concentration_ab_check(const SphereGrid& g, const std::vector<bool>& A, const std::vector<bool>& B) {
    const int d = g.ambient_dim();
    const std::string name = "concentration-ab/S^" + std::to_string(g.n);
    const std::string prov = "Cor eq:AB: sigma(A) sigma(B) <= cos^{n+1}(d(A,B)), A, B symmetric";
    check_mask(g, A);
    check_mask(g, B);
    if (!mask_symmetric(g, A) || !mask_symmetric(g, B)) return skipped_ledger(name, "hypothesis: set not symmetric", prov);
    const auto dist = distance_to(g, A);
    double dAB = kInf;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (B[i]) dAB = std::min(dAB, dist[i]);
    const double rhs = std::pow(std::cos(dAB), d);
    // the cells around the nodes can be 2 mesh closer than the nodes
    const double slack = std::pow(std::cos(std::max(0.0, dAB - 2.0 * g.mesh)), d) - rhs;
    std::ostringstream note;
    note << "sigma(A)=" << format_double(mask_mass(g, A)) << " sigma(B)=" << format_double(mask_mass(g, B))
         << " d=" << format_double(dAB) << " slack=" << format_double(slack);
    return make_ledger(name, mask_mass(g, A) * mask_mass(g, B), rhs, 1e-12 + slack, prov, note.str());
}

Ledger concentration_enlargement_check(const SphereGrid& g, const std::vector<bool>& A, double r) {
    const int d = g.ambient_dim();
    const std::string name = "concentration-enlargement/S^" + std::to_string(g.n);
    const std::string prov =
        "eq:concentration1: sigma(S^n \\ A_r) <= 2 cos^{n+1}(r), A symmetric, sigma(A) >= 1/2";
    check_mask(g, A);
    if (!(r > 0.0) || r > kPi / 2 + 1e-15) throw InvalidArgument("enlargement radius must lie in (0, pi/2]");
    if (!mask_symmetric(g, A)) return skipped_ledger(name, "hypothesis: A is not symmetric", prov);
    if (mask_mass(g, A) < 0.5 - 1e-12) return skipped_ledger(name, "hypothesis: sigma(A) < 1/2", prov);
    const auto dist = distance_to(g, A);
    double outside = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!(dist[i] < r)) outside += g.weights[i];
    const double rhs = 2.0 * std::pow(std::cos(r), d);
    const double slack = 2.0 * std::pow(std::cos(std::max(0.0, r - 2.0 * g.mesh)), d) - rhs;
    std::ostringstream note;
    note << "sigma(A)=" << format_double(mask_mass(g, A)) << " r=" << format_double(r)
         << " slack=" << format_double(slack);
    return make_ledger(name, outside, rhs, 1e-12 + slack, prov, note.str());
}

// ------ Poincare inequality on the sphere

Ledger sphere_poincare_check(const SphereGrid& g, const std::function<double(const Vec&)>& f,
                             const std::function<Vec(const Vec&)>& grad, double tol) {
    const int d = g.ambient_dim();
    const std::string name = "sphere-poincare/S^" + std::to_string(g.n);
    const std::string prov = "eq:PoincareSnsym: 2(n+1) Var_sigma(f) <= int |grad f|^2 dsigma, f even";
    std::vector<double> values(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) values[i] = f(g.nodes[i]);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (std::fabs(values[i] - values[g.antipode[i]]) > 1e-12 * (1.0 + std::fabs(values[i])))
            return skipped_ledger(name, "hypothesis: f is not even", prov);
    double mean = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) mean += g.weights[i] * values[i];
    double var = 0.0, dirichlet = 0.0;
    constexpr double step = 1e-5;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec& u = g.nodes[i];
        var += g.weights[i] * (values[i] - mean) * (values[i] - mean);
        double g2 = 0.0;
        if (grad) {
            const Vec G = grad(u);
            g2 = (G - G.dot(u) * u).squaredNorm();
        } else {
            // orthonormal tangent frame from the full QR of u
            const Mat Q = Eigen::HouseholderQR<Mat>(Mat(u)).householderQ();
            for (int k = 1; k < d; ++k) {
                const Vec t = Q.col(k);
                const double df = (f(std::cos(step) * u + std::sin(step) * t) - f(std::cos(step) * u - std::sin(step) * t)) /
                                  (2.0 * step);
                g2 += df * df;
            }
        }
        dirichlet += g.weights[i] * g2;
    }
    std::ostringstream note;
    note << "Var=" << format_double(var) << " Dirichlet=" << format_double(dirichlet)
         << " ratio=" << format_double(var > 0.0 ? dirichlet / var : kInf);
    return make_ledger(name, 2.0 * d * var, dirichlet, tol * dirichlet, prov, note.str());
}

// ------ caps against the uniform measure

NonsymResult nonsym_cap_check(const SphereGrid& g, const Vec& center, double radius) {
    const Vec c = center.normalized();
    std::vector<bool> A(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) A[i] = angle(g.nodes[i], c) <= radius;
    check_mask(g, A);
    NonsymResult r;
    r.cap_mass = mask_mass(g, A);
    SphericalMeasure nu{g.nodes, std::vector<double>(g.size(), 0.0)};
    for (std::size_t i = 0; i < g.size(); ++i)
        if (A[i]) nu.weights[i] = g.weights[i] / r.cap_mass;
    r.entropy = relative_entropy(g, nu);
    const auto dist = distance_to(g, A);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (dist[i] < kPi / 2 - kOrthogonalAngle) r.enlarged += g.weights[i];
    r.transport = transport_alpha(nu, SphericalMeasure::uniform(g), std::sin(kOrthogonalAngle));
    r.infeasible = std::isinf(r.transport);
    return r;
}

}  // namespace santalo::sphere

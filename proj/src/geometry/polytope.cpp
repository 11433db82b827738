#include "santalo/geometry.hpp"

#include "polytope_core.hpp"

#include <algorithm>
#include <numeric>

namespace santalo::geometry {

namespace {

using core::Hull;
using core::Point;
using core::Rational;

double coordinate_scale(const std::vector<Vec>& pts) {
    double s = 0.0;
    for (const auto& p : pts) s = std::max(s, p.cwiseAbs().maxCoeff());
    return std::max(s, 1e-300);
}

Point<double> to_point(const Vec& v) { return Point<double>(v.data(), v.data() + v.size()); }

Vec to_vec(const Point<double>& p) { return Eigen::Map<const Vec>(p.data(), static_cast<Eigen::Index>(p.size())); }

Vec to_vec(const Point<Rational>& p) {
    Vec v(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) v[static_cast<Eigen::Index>(i)] = p[i].convert_to<double>();
    return v;
}

Point<Rational> to_rational(const Vec& v) {
    Point<Rational> p;
    for (Eigen::Index i = 0; i < v.size(); ++i) p.emplace_back(v[i]);  // exact binary expansion
    return p;
}

// A float hull is accepted if every facet is spanned by its vertices, every
// vertex is simple enough to be pinned down by its facets, and every input
// point satisfies every facet inequality.
bool consistent(const Hull<double>& h, const std::vector<Point<double>>& pts, double tol) {
    if (h.vertices.size() < static_cast<std::size_t>(h.d + 1)) return false;
    if (h.normals.size() < static_cast<std::size_t>(h.d + 1)) return false;
    std::vector<int> count(h.vertices.size(), 0);
    for (const auto& fv : h.facet_vertices) {
        if (fv.size() < static_cast<std::size_t>(h.d)) return false;
        for (int v : fv) ++count[v];
    }
    for (int c : count)
        if (c < h.d) return false;
    for (std::size_t f = 0; f < h.normals.size(); ++f) {
        double nrm = std::sqrt(core::dot(h.normals[f], h.normals[f]));
        for (const auto& p : pts)
            if ((core::dot(h.normals[f], p) - h.offsets[f]) / nrm > 10 * tol) return false;
    }
    return !h.simplices.empty();
}

PolytopeData finish_double(Hull<double>& h) {
    PolytopeData out;
    out.dim = h.d;
    for (const auto& v : h.vertices) out.vertices.push_back(to_vec(v));
    for (std::size_t f = 0; f < h.normals.size(); ++f) {
        Vec a = to_vec(h.normals[f]);
        double nrm = a.norm();
        out.facets.push_back({a / nrm, h.offsets[f] / nrm});
    }
    out.facet_vertices = h.facet_vertices;
    out.simplices = h.simplices;
    return out;
}

PolytopeData finish_rational(Hull<Rational>& h) {
    PolytopeData out;
    out.dim = h.d;
    out.used_exact = true;
    for (const auto& v : h.vertices) out.vertices.push_back(to_vec(v));
    for (std::size_t f = 0; f < h.normals.size(); ++f) {
        Vec a = to_vec(h.normals[f]);
        double b = h.offsets[f].convert_to<double>();
        double nrm = a.norm();
        out.facets.push_back({a / nrm, b / nrm});
    }
    out.facet_vertices = h.facet_vertices;
    out.simplices = h.simplices;
    return out;
}

void fill_moments(PolytopeData& p) {
    const int d = p.dim;
    double vol = 0.0;
    Vec bar = Vec::Zero(d);
    for (const auto& s : p.simplices) {
        Mat m(d, d);
        for (int k = 1; k <= d; ++k) m.col(k - 1) = p.vertices[s[k]] - p.vertices[s[0]];
        double v = std::fabs(m.determinant()) / factorial(d);
        Vec c = Vec::Zero(d);
        for (int idx : s) c += p.vertices[idx];
        c /= (d + 1);
        vol += v;
        bar += v * c;
    }
    if (!(vol > 0.0)) throw DegenerateBody("polytope has zero volume");
    p.volume = vol;
    p.barycenter = bar / vol;
}

Hull<Rational> rational_hull(int dim, const std::vector<Point<Rational>>& pts) {
    Hull<Rational> h;
    h.d = dim;
    if (!core::facets_of_points<Rational>(dim, pts, Rational(0), 0.0, h))
        throw DegenerateBody("points are not full-dimensional");
    core::prune_to_vertices<Rational>(h, pts, Rational(0));
    // facets must be recomputed on the pruned vertex list to keep indices valid
    Hull<Rational> g;
    g.d = dim;
    core::facets_of_points<Rational>(dim, h.vertices, Rational(0), 0.0, g);
    g.vertices = h.vertices;
    core::triangulate<Rational>(g, Rational(0));
    return g;
}

}  // namespace

PolytopeData polytope_from_vertices(int dim, const std::vector<Vec>& points, bool force_exact) {
    if (dim < 1) throw DegenerateBody("dimension must be positive");
    for (const auto& p : points)
        if (p.size() != dim) throw InvalidArgument("vertex dimension mismatch");
    if (points.size() < static_cast<std::size_t>(dim + 1)) throw DegenerateBody("too few points");

    if (!force_exact) {
        const double scale = coordinate_scale(points);
        const double tol = 1e-9 * scale;
        std::vector<Point<double>> pts;
        for (const auto& p : points) pts.push_back(to_point(p));
        Hull<double> h;
        h.d = dim;
        if (!core::facets_of_points<double>(dim, pts, 1e-10 * scale, tol, h))
            throw DegenerateBody("points are not full-dimensional");
        core::prune_to_vertices<double>(h, pts, 1e-10 * scale);
        Hull<double> g;
        g.d = dim;
        bool ok = core::facets_of_points<double>(dim, h.vertices, 1e-10 * scale, tol, g);
        g.vertices = h.vertices;
        if (ok) core::triangulate<double>(g, 1e-10 * scale);
        if (ok && consistent(g, pts, tol)) {
            PolytopeData out = finish_double(g);
            fill_moments(out);
            return out;
        }
    }
    std::vector<Point<Rational>> pts;
    for (const auto& p : points) pts.push_back(to_rational(p));
    Hull<Rational> g = rational_hull(dim, pts);
    PolytopeData out = finish_rational(g);
    fill_moments(out);
    return out;
}

PolytopeData polytope_from_halfspaces(int dim, const std::vector<Halfspace>& halfspaces, bool force_exact) {
    if (halfspaces.size() < static_cast<std::size_t>(dim + 1)) throw DegenerateBody("unbounded: too few halfspaces");
    for (const auto& h : halfspaces)
        if (h.normal.size() != dim) throw InvalidArgument("halfspace dimension mismatch");
    std::vector<Vec> verts;
    if (!force_exact) {
        double scale = 0.0;
        for (const auto& h : halfspaces) scale = std::max(scale, h.normal.cwiseAbs().maxCoeff());
        std::vector<Point<double>> normals;
        std::vector<double> offsets;
        for (const auto& h : halfspaces) {
            double nrm = h.normal.norm();
            normals.push_back(to_point(h.normal / nrm));
            offsets.push_back(h.offset / nrm);
        }
        double off_scale = 1.0;
        for (double b : offsets) off_scale = std::max(off_scale, std::fabs(b));
        auto pts = core::vertices_of_halfspaces<double>(dim, normals, offsets, 1e-10, 1e-9 * off_scale);
        for (const auto& p : pts) verts.push_back(to_vec(p));
    } else {
        std::vector<Point<Rational>> normals;
        std::vector<Rational> offsets;
        for (const auto& h : halfspaces) {
            normals.push_back(to_rational(h.normal));
            offsets.emplace_back(h.offset);
        }
        auto pts = core::vertices_of_halfspaces<Rational>(dim, normals, offsets, Rational(0), 0.0);
        for (const auto& p : pts) verts.push_back(to_vec(p));
    }
    if (verts.size() < static_cast<std::size_t>(dim + 1))
        throw DegenerateBody("halfspaces do not bound a full-dimensional polytope");
    // The region is bounded iff every facet of conv(vertices) is one of the
    // input halfspaces; otherwise the true region extends past the hull.
    PolytopeData out = polytope_from_vertices(dim, verts, force_exact);
    for (const auto& f : out.facets) {
        bool found = false;
        for (const auto& h : halfspaces) {
            double nrm = h.normal.norm();
            if ((h.normal / nrm - f.normal).norm() < 1e-7 && std::fabs(h.offset / nrm - f.offset) < 1e-7 * (1 + std::fabs(f.offset))) {
                found = true;
                break;
            }
        }
        if (!found) throw DegenerateBody("halfspace system is unbounded");
    }
    return out;
}

std::vector<double> facet_areas(const PolytopeData& p) {
    const int d = p.dim;
    std::vector<double> areas;
    for (std::size_t f = 0; f < p.facets.size(); ++f) {
        const Vec& a = p.facets[f].normal;
        if (d == 1) {
            areas.push_back(1.0);
            continue;
        }
        Eigen::Index k;
        a.cwiseAbs().maxCoeff(&k);
        std::vector<Vec> proj;
        for (int v : p.facet_vertices[f]) {
            Vec q(d - 1);
            for (int i = 0, j = 0; i < d; ++i)
                if (i != k) q[j++] = p.vertices[v][i];
            proj.push_back(q);
        }
        PolytopeData sub = polytope_from_vertices(d - 1, proj);
        areas.push_back(sub.volume / std::fabs(a[k]));
    }
    return areas;
}

ExactVolumeProduct exact_volume_product(int dim, const std::vector<Vec>& vertices) {
    std::vector<Point<Rational>> pts;
    for (const auto& p : vertices) pts.push_back(to_rational(p));
    Hull<Rational> k = rational_hull(dim, pts);
    std::vector<Point<Rational>> polar_pts;
    for (std::size_t f = 0; f < k.normals.size(); ++f) {
        if (k.offsets[f] <= 0) throw OriginNotInterior("origin not interior");
        Point<Rational> q = k.normals[f];
        for (auto& x : q) x /= k.offsets[f];
        polar_pts.push_back(q);
    }
    Hull<Rational> kp = rational_hull(dim, polar_pts);
    Rational prod = core::hull_volume(k) * core::hull_volume(kp);
    ExactVolumeProduct out;
    out.numerator = boost::multiprecision::numerator(prod).str();
    out.denominator = boost::multiprecision::denominator(prod).str();
    out.value = prod.convert_to<double>();
    return out;
}

bool ExactVolumeProduct::equals(long long num, long long den) const {
    Rational a(numerator + "/" + denominator);
    return a == Rational(num, den);
}

}  // namespace santalo::geometry

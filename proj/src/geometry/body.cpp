#include "santalo/geometry.hpp"

#include <algorithm>

namespace santalo::geometry {

namespace {

int shape_dim(const ConvexBody::Shape& s) {
    return std::visit(
        [](const auto& x) -> int {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Ellipsoid>) return static_cast<int>(x.matrix.rows());
            else return x.dim;
        },
        s);
}

bool point_set_contains(const std::vector<Vec>& set, const Vec& p, double tol) {
    for (const auto& q : set)
        if ((q - p).cwiseAbs().maxCoeff() <= tol) return true;
    return false;
}

}  // namespace

ConvexBody::ConvexBody(Shape shape) : shape_(std::move(shape)), dim_(shape_dim(shape_)) {
    if (dim_ < 1) throw DegenerateBody("dimension must be positive");
    if (auto* h = std::get_if<HPolytope>(&shape_)) {
        poly_ = std::make_shared<const PolytopeData>(polytope_from_halfspaces(dim_, h->halfspaces));
    } else if (auto* v = std::get_if<VPolytope>(&shape_)) {
        poly_ = std::make_shared<const PolytopeData>(polytope_from_vertices(dim_, v->vertices));
    }
    if (poly_) {
        volume_ = poly_->volume;
        barycenter_ = poly_->barycenter;
    } else {
        init_smooth();
    }
}

ConvexBody::ConvexBody(Shape shape, std::shared_ptr<const PolytopeData> poly)
    : shape_(std::move(shape)), dim_(shape_dim(shape_)), poly_(std::move(poly)) {
    volume_ = poly_->volume;
    barycenter_ = poly_->barycenter;
}

void ConvexBody::init_smooth() {
    barycenter_ = Vec::Zero(dim_);
    if (auto* b = std::get_if<Ball>(&shape_)) {
        if (!(b->radius > 0.0)) throw DegenerateBody("ball radius must be positive");
        volume_ = unit_ball_volume(dim_) * std::pow(b->radius, dim_);
    } else {
        const auto& e = std::get<Ellipsoid>(shape_);
        if (e.matrix.rows() != e.matrix.cols()) throw InvalidArgument("ellipsoid matrix must be square");
        Eigen::SelfAdjointEigenSolver<Mat> es(e.matrix);
        if (es.eigenvalues().minCoeff() <= 0.0) throw DegenerateBody("ellipsoid matrix must be positive definite");
        volume_ = unit_ball_volume(dim_) / std::sqrt(e.matrix.determinant());
    }
}

ConvexBody ConvexBody::from_vertices(std::vector<Vec> vertices) {
    if (vertices.empty()) throw DegenerateBody("no vertices");
    int d = static_cast<int>(vertices.front().size());
    return ConvexBody(VPolytope{d, std::move(vertices)});
}

ConvexBody ConvexBody::from_halfspaces(std::vector<Halfspace> halfspaces) {
    if (halfspaces.empty()) throw DegenerateBody("no halfspaces");
    int d = static_cast<int>(halfspaces.front().normal.size());
    return ConvexBody(HPolytope{d, std::move(halfspaces)});
}

ConvexBody ConvexBody::ball(int dim, double radius) { return ConvexBody(Ball{dim, radius}); }

ConvexBody ConvexBody::ellipsoid(Mat matrix) { return ConvexBody(Ellipsoid{std::move(matrix)}); }

ConvexBody ConvexBody::cube(int dim, double half_width) {
    std::vector<Halfspace> hs;
    for (int i = 0; i < dim; ++i)
        for (double sgn : {1.0, -1.0}) {
            Vec a = Vec::Zero(dim);
            a[i] = sgn;
            hs.push_back({a, half_width});
        }
    return from_halfspaces(std::move(hs));
}

ConvexBody ConvexBody::cross_polytope(int dim, double radius) {
    std::vector<Vec> vs;
    for (int i = 0; i < dim; ++i)
        for (double sgn : {1.0, -1.0}) {
            Vec v = Vec::Zero(dim);
            v[i] = sgn * radius;
            vs.push_back(v);
        }
    return from_vertices(std::move(vs));
}

const PolytopeData& ConvexBody::polytope() const {
    if (!poly_) throw InvalidArgument("body is not a polytope");
    return *poly_;
}

double support_function(const ConvexBody& body, const Vec& y) {
    if (y.size() != body.dim()) throw InvalidArgument("dimension mismatch");
    if (body.is_polytope()) {
        double best = -kInf;
        for (const auto& v : body.polytope().vertices) best = std::max(best, v.dot(y));
        return best;
    }
    if (auto* b = std::get_if<Ball>(&body.shape())) return b->radius * y.norm();
    const auto& e = std::get<Ellipsoid>(body.shape());
    return std::sqrt(std::max(0.0, y.dot(e.matrix.ldlt().solve(y))));
}

bool contains_origin_interior(const ConvexBody& body, double margin) {
    if (!body.is_polytope()) return true;  // balls and ellipsoids are centered
    for (const auto& f : body.polytope().facets)
        if (!(f.offset > margin)) return false;
    return true;
}

double radial_function(const ConvexBody& body, const Vec& u) {
    if (u.size() != body.dim()) throw InvalidArgument("dimension mismatch");
    if (u.norm() == 0.0) throw InvalidArgument("radial function needs a nonzero direction");
    if (body.is_polytope()) {
        if (!contains_origin_interior(body)) throw OriginNotInterior("radial function needs 0 in int(K)");
        double best = kInf;
        for (const auto& f : body.polytope().facets) {
            double a = f.normal.dot(u);
            if (a > 0.0) best = std::min(best, f.offset / a);
        }
        return best;
    }
    if (auto* b = std::get_if<Ball>(&body.shape())) return b->radius / u.norm();
    const auto& e = std::get<Ellipsoid>(body.shape());
    return 1.0 / std::sqrt(u.dot(e.matrix * u));
}

ConvexBody polar(const ConvexBody& body) {
    if (body.is_polytope()) {
        if (!contains_origin_interior(body)) throw OriginNotInterior("polar needs 0 in int(K)");
        const PolytopeData& p = body.polytope();
        // Vertices of K° are a_i/b_i; its facets v.y <= 1 come out of the
        // enumeration, which also supplies the triangulation.
        std::vector<Vec> pv;
        for (const auto& f : p.facets) pv.push_back(f.normal / f.offset);
        auto q = std::make_shared<PolytopeData>(polytope_from_vertices(p.dim, pv));
        ConvexBody::Shape shape;
        if (std::holds_alternative<HPolytope>(body.shape())) shape = VPolytope{p.dim, q->vertices};
        else {
            HPolytope h{p.dim, {}};
            for (const auto& v : p.vertices) h.halfspaces.push_back({v, 1.0});
            shape = h;
        }
        return ConvexBody(std::move(shape), std::move(q));
    }
    if (auto* b = std::get_if<Ball>(&body.shape())) return ConvexBody::ball(b->dim, 1.0 / b->radius);
    const auto& e = std::get<Ellipsoid>(body.shape());
    return ConvexBody::ellipsoid(e.matrix.inverse());
}

double volume(const ConvexBody& body) { return body.volume(); }

Vec barycenter(const ConvexBody& body) { return body.barycenter(); }

bool is_unconditional(const ConvexBody& body, double tol) {
    const int d = body.dim();
    if (body.is_polytope()) {
        const auto& vs = body.polytope().vertices;
        double scale = 0.0;
        for (const auto& v : vs) scale = std::max(scale, v.cwiseAbs().maxCoeff());
        for (int i = 0; i < d; ++i)
            for (const auto& v : vs) {
                Vec w = v;
                w[i] = -w[i];
                if (!point_set_contains(vs, w, tol * scale)) return false;
            }
        return true;
    }
    if (std::holds_alternative<Ball>(body.shape())) return true;
    const Mat& m = std::get<Ellipsoid>(body.shape()).matrix;
    double scale = m.cwiseAbs().maxCoeff();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j && std::fabs(m(i, j)) > tol * scale) return false;
    return true;
}

bool is_symmetric(const ConvexBody& body, double tol) {
    if (!body.is_polytope()) return true;
    const auto& vs = body.polytope().vertices;
    double scale = 0.0;
    for (const auto& v : vs) scale = std::max(scale, v.cwiseAbs().maxCoeff());
    for (const auto& v : vs)
        if (!point_set_contains(vs, -v, tol * scale)) return false;
    return true;
}

ConvexBody translate(const ConvexBody& body, const Vec& a) {
    if (!body.is_polytope()) throw InvalidArgument("only polytopes can be translated");
    std::vector<Vec> vs;
    for (const auto& v : body.polytope().vertices) vs.push_back(v + a);
    if (std::holds_alternative<HPolytope>(body.shape())) {
        std::vector<Halfspace> hs;
        for (const auto& f : body.polytope().facets) hs.push_back({f.normal, f.offset + f.normal.dot(a)});
        return ConvexBody::from_halfspaces(std::move(hs));
    }
    return ConvexBody::from_vertices(std::move(vs));
}

ConvexBody scale(const ConvexBody& body, double factor) {
    if (!(factor > 0.0)) throw InvalidArgument("scale factor must be positive");
    if (body.is_polytope()) {
        if (std::holds_alternative<HPolytope>(body.shape())) {
            std::vector<Halfspace> hs;
            for (const auto& f : body.polytope().facets) hs.push_back({f.normal, f.offset * factor});
            return ConvexBody::from_halfspaces(std::move(hs));
        }
        std::vector<Vec> vs;
        for (const auto& v : body.polytope().vertices) vs.push_back(v * factor);
        return ConvexBody::from_vertices(std::move(vs));
    }
    if (auto* b = std::get_if<Ball>(&body.shape())) return ConvexBody::ball(b->dim, b->radius * factor);
    return ConvexBody::ellipsoid(std::get<Ellipsoid>(body.shape()).matrix / (factor * factor));
}

ConvexBody normalize_volume(const ConvexBody& body) {
    return scale(body, std::pow(body.volume(), -1.0 / body.dim()));
}

nlohmann::json to_json(const ConvexBody& body) {
    nlohmann::json j;
    j["dim"] = body.dim();
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, HPolytope>) {
                j["kind"] = "hpolytope";
                auto arr = nlohmann::json::array();
                for (const auto& h : s.halfspaces) {
                    std::vector<double> row(h.normal.data(), h.normal.data() + h.normal.size());
                    row.push_back(h.offset);
                    arr.push_back(row);
                }
                j["halfspaces"] = arr;
            } else if constexpr (std::is_same_v<T, VPolytope>) {
                j["kind"] = "vpolytope";
                auto arr = nlohmann::json::array();
                for (const auto& v : s.vertices) arr.push_back(std::vector<double>(v.data(), v.data() + v.size()));
                j["vertices"] = arr;
            } else if constexpr (std::is_same_v<T, Ball>) {
                j["kind"] = "ball";
                j["radius"] = s.radius;
            } else {
                j["kind"] = "ellipsoid";
                auto arr = nlohmann::json::array();
                for (Eigen::Index r = 0; r < s.matrix.rows(); ++r) {
                    std::vector<double> row;
                    for (Eigen::Index c = 0; c < s.matrix.cols(); ++c) row.push_back(s.matrix(r, c));
                    arr.push_back(row);
                }
                j["matrix"] = arr;
            }
        },
        body.shape());
    return j;
}

ConvexBody body_from_json(const nlohmann::json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        const int dim = j.at("dim").get<int>();
        auto read_vec = [&](const nlohmann::json& a, std::size_t n) {
            if (a.size() != n) throw InvalidArgument("coordinate count does not match dim");
            Vec v(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
            return v;
        };
        if (kind == "hpolytope") {
            HPolytope h{dim, {}};
            for (const auto& row : j.at("halfspaces")) {
                Vec full = read_vec(row, dim + 1);
                h.halfspaces.push_back({full.head(dim), full[dim]});
            }
            return ConvexBody(h);
        }
        if (kind == "vpolytope") {
            VPolytope v{dim, {}};
            for (const auto& row : j.at("vertices")) v.vertices.push_back(read_vec(row, dim));
            return ConvexBody(v);
        }
        if (kind == "ball") return ConvexBody::ball(dim, j.at("radius").get<double>());
        if (kind == "ellipsoid") {
            Mat m(dim, dim);
            const auto& rows = j.at("matrix");
            if (rows.size() != static_cast<std::size_t>(dim)) throw InvalidArgument("matrix row count");
            for (int r = 0; r < dim; ++r) m.row(r) = read_vec(rows[r], dim).transpose();
            return ConvexBody::ellipsoid(m);
        }
        throw InvalidArgument("unknown body kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed body json: ") + e.what());
    }
}

}  // namespace santalo::geometry

#include "santalo/santalo.hpp"

#include <boost/math/quadrature/gauss.hpp>

namespace santalo {

using geometry::ConvexBody;

namespace {

// Surface-measure quadrature on S^{n-1} for n <= 3.
void sphere_rule(int n, std::vector<Vec>& dirs, std::vector<double>& w) {
    if (n == 1) {
        for (double s : {1.0, -1.0}) {
            Vec u(1);
            u << s;
            dirs.push_back(u);
            w.push_back(1.0);
        }
    } else if (n == 2) {
        const int m = 4096;
        for (int k = 0; k < m; ++k) {
            double t = 2.0 * kPi * (k + 0.5) / m;
            Vec u(2);
            u << std::cos(t), std::sin(t);
            dirs.push_back(u);
            w.push_back(2.0 * kPi / m);
        }
    } else if (n == 3) {
        using GL = boost::math::quadrature::gauss<double, 96>;
        const int m = 192;
        std::vector<std::pair<double, double>> nodes;
        for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
            double x = GL::abscissa()[i], wt = GL::weights()[i];
            if (x == 0.0) nodes.push_back({0.0, wt});
            else {
                nodes.push_back({x, wt});
                nodes.push_back({-x, wt});
            }
        }
        for (auto [ct, wt] : nodes) {
            double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
            for (int k = 0; k < m; ++k) {
                double p = 2.0 * kPi * (k + 0.5) / m;
                Vec u(3);
                u << st * std::cos(p), st * std::sin(p), ct;
                dirs.push_back(u);
                w.push_back(wt * 2.0 * kPi / m);
            }
        }
    } else {
        throw InvalidArgument("smooth-body polar integrals are implemented for n <= 3");
    }
}

}  // namespace

SantaloFunctional::SantaloFunctional(const ConvexBody& body) : body_(body), dim_(body.dim()) {
    if (body.is_polytope()) {
        const auto& p = body.polytope();
        for (const auto& a : p.vertices)
            for (const auto& b : p.vertices) diameter_ = std::max(diameter_, (a - b).norm());
        if (!geometry::contains_origin_interior(body)) throw PointOutside("0 must lie in int(K)");
        auto kp = geometry::polar(body);
        polar_vertices_ = kp.polytope().vertices;
        polar_simplices_ = kp.polytope().simplices;
    } else {
        double maxh = 0.0;
        sphere_rule(dim_, directions_, weights_);
        for (const auto& u : directions_) {
            supports_.push_back(geometry::support_function(body, u));
            maxh = std::max(maxh, supports_.back());
        }
        diameter_ = 2.0 * maxh;
    }
}

double SantaloFunctional::interior_margin(const Vec& z) const {
    if (body_.is_polytope()) {
        double m = kInf;
        for (const auto& f : body_.polytope().facets) m = std::min(m, f.offset - f.normal.dot(z));
        return m;
    }
    // for centered smooth bodies: h(u) - z.u minimized over directions
    double m = kInf;
    for (std::size_t i = 0; i < directions_.size(); ++i) m = std::min(m, supports_[i] - z.dot(directions_[i]));
    return m;
}

PolarVolumeDerivatives SantaloFunctional::derivatives(const Vec& z, bool with_hessian) const {
    if (z.size() != dim_) throw InvalidArgument("dimension mismatch");
    const int n = dim_;
    if (!(interior_margin(z) > 0.0)) throw PointOutside("z must lie in int(K)");
    PolarVolumeDerivatives out;
    out.gradient = Vec::Zero(n);
    out.hessian = Mat::Zero(n, n);
    if (body_.is_polytope()) {
        // (K - z)° is the projective image x -> x / (1 - z.x) of K°, which maps
        // the simplices of a triangulation of K° onto simplices.
        std::vector<Vec> w(polar_vertices_.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
            double den = 1.0 - z.dot(polar_vertices_[i]);
            if (!(den > 0.0)) throw DivergentIntegral("1 - <z,x> vanishes on K°");
            w[i] = polar_vertices_[i] / den;
        }
        Mat m(n, n);
        Vec sum(n);
        Mat outer(n, n);
        double vol = 0.0;
        Vec first = Vec::Zero(n);
        Mat second = Mat::Zero(n, n);
        for (const auto& s : polar_simplices_) {
            for (int k = 1; k <= n; ++k) m.col(k - 1) = w[s[k]] - w[s[0]];
            double v = std::fabs(m.determinant()) / factorial(n);
            sum.setZero();
            outer.setZero();
            for (int idx : s) {
                sum += w[idx];
                if (with_hessian) outer += w[idx] * w[idx].transpose();
            }
            vol += v;
            first += v * sum / (n + 1);
            if (with_hessian) second += v / ((n + 1.0) * (n + 2.0)) * (outer + sum * sum.transpose());
        }
        out.value = vol;
        out.gradient = (n + 1.0) * first;
        if (with_hessian) out.hessian = (n + 1.0) * (n + 2.0) * second;
        return out;
    }
    // |(K - z)°| = (1/n) int_{S^{n-1}} (h(u) - <z,u>)^{-n} du
    double value = 0.0;
    for (std::size_t i = 0; i < directions_.size(); ++i) {
        const Vec& u = directions_[i];
        double g = supports_[i] - z.dot(u);
        double gn = std::pow(g, -n);
        value += weights_[i] * gn / n;
        out.gradient += weights_[i] * gn / g * u;
        if (with_hessian) out.hessian += weights_[i] * (n + 1.0) * gn / (g * g) * (u * u.transpose());
    }
    out.value = value;
    return out;
}

Vec SantaloFunctional::polar_barycenter(const Vec& z) const {
    auto d = derivatives(z, false);
    return d.gradient / ((dim_ + 1.0) * d.value);
}

double santalo_functional(const ConvexBody& K, const Vec& z) { return SantaloFunctional(K).value(z); }

SantaloResult santalo_point(const ConvexBody& K, double tol, int max_iter) {
    if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
    SantaloFunctional F(K);
    const double margin = 1e-6 * F.diameter();
    Vec z = Vec::Zero(K.dim());
    auto d = F.derivatives(z);
    for (int it = 0; it < max_iter; ++it) {
        double gn = d.gradient.norm();
        if (gn <= tol) return {z, d.value, it, gn};
        Vec step = -d.hessian.ldlt().solve(d.gradient);
        double t = 1.0;
        const double slope = d.gradient.dot(step);
        bool accepted = false;
        for (int k = 0; k < 60; ++k, t *= 0.5) {
            Vec cand = z + t * step;
            if (!(F.interior_margin(cand) > margin)) continue;
            auto dc = F.derivatives(cand);
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
    throw MaxIterations(max_iter, z, "santalo_point");
}

double volume_product(const ConvexBody& K, VolumeProductMode mode) {
    if (mode == VolumeProductMode::AtOrigin) {
        if (!geometry::contains_origin_interior(K)) throw OriginNotInterior("volume product at origin");
        return K.volume() * geometry::polar(K).volume();
    }
    return K.volume() * santalo_point(K).polar_volume;
}

namespace {
constexpr const char* kBsProvenance =
    "Thm BS-set-gen: |K||K°| <= |B|^2 (1 - <San(K°), bar(K)>)^(n+1)";
}

Ledger bs_check(const ConvexBody& K) {
    const int n = K.dim();
    auto kp = geometry::polar(K);
    auto san = santalo_point(kp);
    double lhs = K.volume() * kp.volume();
    double c = san.point.dot(K.barycenter());
    double rhs = std::pow(unit_ball_volume(n), 2) * std::pow(1.0 - c, n + 1);
    return make_ledger("bs_check", lhs, rhs, 1e-6 * rhs, kBsProvenance,
                       "<San(K°),bar(K)> = " + format_double(c));
}

Ledger santalo_sign_check(const ConvexBody& K) {
    auto kp = geometry::polar(K);
    auto san = santalo_point(kp);
    double c = san.point.dot(K.barycenter());
    return make_ledger("santalo_sign", c, 0.0, 1e-9, "Remark rem:santalo-sets-sign: <San(K°), bar(K)> <= 0");
}

}  // namespace santalo

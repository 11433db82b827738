#include "doctest.h"

#include "santalo/rng.hpp"
#include "santalo/sphere.hpp"
#include "santalo/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

using namespace santalo;
using namespace santalo::sphere;
using santalo::geometry::ConvexBody;

namespace {

Vec v2(double a, double b) {
    Vec x(2);
    x << a, b;
    return x;
}

Vec v3(double a, double b, double c) {
    Vec x(3);
    x << a, b, c;
    return x;
}

ConvexBody box(double a, double b) { return ConvexBody::from_vertices({v2(a, b), v2(-a, b), v2(a, -b), v2(-a, -b)}); }

// Symmetric polygon from half of its vertices in angular order.
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

// Cone masses of a polygon by triangle fans: the triangle (0, v_k, v_{k+1})
// has area |det|/2 and is the cone over the edge.
std::vector<std::pair<Vec, double>> polygon_cone_oracle(const ConvexBody& C) {
    auto v = C.polytope().vertices;
    std::sort(v.begin(), v.end(), [](const Vec& a, const Vec& b) { return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]); });
    std::vector<std::pair<Vec, double>> out;
    double total = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const Vec& a = v[k];
        const Vec& b = v[(k + 1) % v.size()];
        const double area = 0.5 * std::fabs(a[0] * b[1] - a[1] * b[0]);
        out.push_back({v2(b[1] - a[1], a[0] - b[0]).normalized(), area});
        total += area;
    }
    for (auto& p : out) p.second /= total;
    return out;
}

double mass_at(const ConeMeasure& cm, const Vec& u) {
    for (std::size_t i = 0; i < cm.normals.size(); ++i)
        if ((cm.normals[i] - u).norm() < 1e-9) return cm.masses[i];
    return -1.0;
}

SphericalMeasure atoms(std::vector<Vec> pts, std::vector<double> w) {
    for (auto& p : pts) p.normalize();
    return {pts, w};
}

std::vector<double> tv_pair(const ConvexBody& C, const SphericalMeasure& nu) {
    const auto cm = cone_measure(C, true);
    std::vector<double> out;
    for (std::size_t i = 0; i < nu.size(); ++i) out.push_back(std::max(0.0, mass_at(cm, nu.points[i])));
    return out;
}

double tv(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    return 0.5 * s;
}

}  // namespace

TEST_CASE("sphere grids integrate low moments and are closed under both symmetries") {
    for (const auto& g : {SphereGrid::circle(4), SphereGrid::circle(64), SphereGrid::icosahedral(0),
                          SphereGrid::icosahedral(2), SphereGrid::icosahedral(3)}) {
        g.validate();
        CHECK(g.integrate([](const Vec&) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-14));
        const double d = g.ambient_dim();
        CHECK(std::fabs(g.integrate([](const Vec& u) { return u[0] * u[0]; }) - 1.0 / d) <= 1e-3);
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK((g.nodes[g.antipode[i]] + g.nodes[i]).norm() < 1e-12);
            CHECK(g.weights[g.antipode[i]] == g.weights[i]);
            CHECK(g.weights[g.mirror[i]] == g.weights[i]);
        }
    }
    CHECK(SphereGrid::icosahedral(2).size() == 162);
    CHECK(SphereGrid::icosahedral(4).size() == 2562);
    // exact moment of u1^4 on S^2 is 1/5
    CHECK(std::fabs(SphereGrid::icosahedral(4).integrate([](const Vec& u) { return std::pow(u[0], 4); }) - 0.2) <= 1e-3);
    CHECK_THROWS_AS(SphereGrid::circle(1), InvalidArgument);
    CHECK_THROWS_AS(SphereGrid::icosahedral(5), InvalidArgument);
}

TEST_CASE("sphere grid json and csv") {
    const auto g = grid_from_json({{"type", "icosahedral"}, {"level", 1}});
    CHECK(g.size() == 42);
    CHECK(grid_from_json(g.spec).size() == 42);
    CHECK_THROWS_AS(grid_from_json({{"type", "torus"}}), ConfigInvalid);
    CHECK_THROWS_AS(grid_from_json({{"type", "circle"}}), ConfigInvalid);
    std::ostringstream os;
    write_csv(os, SphereGrid::circle(2));
    const std::string s = os.str();
    CHECK(s.rfind("x0,x1,weight\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 5);
}

TEST_CASE("cone measures of the normalized square, cross-polytope and cube") {
    const auto sq = cone_measure(ConvexBody::cube(2, 0.5));
    REQUIRE(sq.normals.size() == 4);
    for (const auto& u : {v2(1, 0), v2(-1, 0), v2(0, 1), v2(0, -1)}) CHECK(mass_at(sq, u) == doctest::Approx(0.25).epsilon(1e-14));

    const auto cr = cone_measure(ConvexBody::cross_polytope(2, 1.0), true);
    const double r = 1.0 / std::sqrt(2.0);
    for (const auto& u : {v2(r, r), v2(-r, r), v2(r, -r), v2(-r, -r)}) CHECK(mass_at(cr, u) == doctest::Approx(0.25).epsilon(1e-14));

    const auto cube = cone_measure(ConvexBody::cube(3, 0.5));
    REQUIRE(cube.normals.size() == 6);
    for (double m : cube.masses) CHECK(m == doctest::Approx(1.0 / 6).epsilon(1e-14));

    CHECK_THROWS_AS(cone_measure(ConvexBody::cube(2, 1.0)), NotUnitVolume);
    const auto tri = ConvexBody::from_vertices({v2(-1, -1), v2(2, -1), v2(-1, 2)});
    CHECK_THROWS_AS(cone_measure(tri, true), NotSymmetric);
}

TEST_CASE("cone measures agree with the triangle-fan oracle on random symmetric polygons") {
    Rng rng(11);
    for (int t = 0; t < 30; ++t) {
        const auto C = geometry::normalize_volume(symmetric_polygon(rng, 3 + int(rng.below(4))));
        const auto cm = cone_measure(C);
        CHECK(std::accumulate(cm.masses.begin(), cm.masses.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
        const auto oracle = polygon_cone_oracle(C);
        CHECK(oracle.size() == cm.normals.size());
        for (const auto& [u, m] : oracle) CHECK(std::fabs(mass_at(cm, u) - m) <= 1e-12);
        // symmetric under u -> -u
        for (std::size_t i = 0; i < cm.normals.size(); ++i)
            CHECK(std::fabs(mass_at(cm, -cm.normals[i]) - cm.masses[i]) <= 1e-12);
    }
}

TEST_CASE("Monte-Carlo Gauss-map frequencies match the cone masses within 3 standard errors") {
    Rng rng(2024);
    const long samples = 200000;
    Rng body_rng(5);
    for (const auto& C : {geometry::normalize_volume(symmetric_polygon(body_rng, 4)), ConvexBody::cube(3, 0.5),
                          geometry::normalize_volume(ConvexBody::cross_polytope(3))}) {
        const auto cm = cone_measure(C, true);
        const auto freq = cone_measure_monte_carlo(geometry::normalize_volume(C), samples, rng);
        for (std::size_t i = 0; i < freq.size(); ++i) {
            const double se = std::sqrt(cm.masses[i] * (1 - cm.masses[i]) / samples);
            CHECK(std::fabs(freq[i] - cm.masses[i]) <= 3.0 * se + 1e-12);
        }
    }
}

TEST_CASE("subspace concentration examples") {
    const auto cube = cone_measure(ConvexBody::cube(2, 0.5)).measure();
    const auto rc = subspace_concentration_check(cube);
    CHECK(rc.status == ConcentrationStatus::Equality);
    CHECK(rc.max_mass[0] == doctest::Approx(0.5));

    const auto bad = atoms({v2(1, 0), v2(-1, 0), v2(0, 1), v2(0, -1)}, {0.4, 0.4, 0.1, 0.1});
    const auto rb = subspace_concentration_check(bad);
    CHECK(rb.status == ConcentrationStatus::Violated);
    CHECK(rb.max_mass[0] == doctest::Approx(0.8));
    CHECK(rb.witness.cols() == 1);

    std::vector<Vec> pts;
    for (int k = 0; k < 8; ++k) pts.push_back(v2(std::cos(k * kPi / 4 + 0.1), std::sin(k * kPi / 4 + 0.1)));
    const auto gen = subspace_concentration_check(atoms(pts, std::vector<double>(8, 0.125)));
    CHECK(gen.status == ConcentrationStatus::Strict);
    CHECK(gen.slack[0] == doctest::Approx(0.25));

    // R^3: half the mass on a plane is equality only if the rest spans a line
    const auto plane_line = atoms({v3(1, 0, 0), v3(-1, 0, 0), v3(0, 1, 0), v3(0, -1, 0), v3(0, 0, 1), v3(0, 0, -1)},
                                  std::vector<double>(6, 1.0 / 6));
    CHECK(subspace_concentration_check(plane_line).status == ConcentrationStatus::Equality);
    const auto two_thirds_on_plane =
        atoms({v3(1, 0, 0), v3(-1, 0, 0), v3(0, 1, 0), v3(0, -1, 0), v3(1, 1, 1), v3(-1, -1, -1)},
              {0.2, 0.2, 0.2, 0.2, 0.1, 0.1});
    CHECK(subspace_concentration_check(two_thirds_on_plane).status == ConcentrationStatus::Violated);
}

TEST_CASE("phi_nu examples") {
    const auto nu = atoms({v2(1, 0), v2(-1, 0), v2(0, 1), v2(0, -1)}, std::vector<double>(4, 0.25));
    const auto sq = ConvexBody::cube(2, 0.5);
    CHECK(phi_nu(nu, sq) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
    CHECK(phi_nu(nu, geometry::scale(sq, 3.0)) == doctest::Approx(std::log(0.5) + std::log(3.0)).epsilon(1e-13));
    const auto cross = geometry::normalize_volume(ConvexBody::cross_polytope(2));
    CHECK(phi_nu(nu, cross) == doctest::Approx(-0.5 * std::log(2.0)).epsilon(1e-13));
    CHECK_THROWS_AS(phi_nu(nu, geometry::translate(sq, v2(0.5, 0))), OriginNotInterior);
}

TEST_CASE("log-Minkowski solver recovers cone-measure fixed points") {
    SUBCASE("square from a rectangular start") {
        const auto nu = cone_measure(ConvexBody::cube(2, 0.5)).measure();
        LogMinkowskiOptions opt;
        opt.tol = 1e-6;
        opt.initial_h = {2.0, 2.0, 0.5, 0.5};
        const auto r = log_minkowski_solve(nu, opt);
        CHECK(r.residual <= 1e-6);
        CHECK(!r.warning.empty());
        CHECK(r.body.volume() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(tv(tv_pair(r.body, nu), nu.weights) <= 1e-6);
    }
    SUBCASE("cross-polytope") {
        const auto nu = cone_measure(ConvexBody::cross_polytope(2), true).measure();
        const auto r = log_minkowski_solve(nu, {1e-6, 20000, {}});
        CHECK(tv(tv_pair(r.body, nu), nu.weights) <= 1e-6);
        CHECK(r.body.volume() * geometry::polar(r.body).volume() == doctest::Approx(8.0).epsilon(1e-9));
    }
    SUBCASE("2:1 rectangle") {
        const auto nu = cone_measure(box(1.0, 0.5), true).measure();
        const auto r = log_minkowski_solve(nu, {1e-5, 20000, {1.0, 1.0, 0.5, 0.5}});
        CHECK(tv(tv_pair(r.body, nu), nu.weights) <= 1e-5);
    }
    SUBCASE("random hexagons in strict position") {
        Rng rng(3);
        for (int t = 0; t < 5; ++t) {
            const auto C = geometry::normalize_volume(symmetric_polygon(rng, 3));
            const auto nu = cone_measure(C).measure();
            if (nu.size() == 4) continue;  // a vertex pair fell inside: parallelogram
            REQUIRE(subspace_concentration_check(nu).status == ConcentrationStatus::Strict);
            const auto r = log_minkowski_solve(nu, {1e-7, 20000, {}});
            CHECK(tv(tv_pair(r.body, nu), nu.weights) <= 1e-7);
            // symmetric minimizers in the plane are unique: the solver finds C itself
            for (std::size_t i = 0; i < nu.size(); ++i)
                CHECK(r.h[i] == doctest::Approx(geometry::support_function(C, nu.points[i])).epsilon(1e-5));
        }
    }
    SUBCASE("errors") {
        const auto bad = atoms({v2(1, 0), v2(-1, 0), v2(0, 1), v2(0, -1)}, {0.3, 0.3, 0.2, 0.2});
        CHECK_THROWS_AS(log_minkowski_solve(bad), NotConcentrated);
        const auto asym = atoms({v2(1, 0), v2(-1, 1), v2(-1, -1)}, {0.4, 0.3, 0.3});
        CHECK_THROWS_AS(log_minkowski_solve(asym), NotSymmetric);
        const auto hex = ConvexBody::from_vertices({v2(2, 0), v2(-2, 0), v2(1, 1), v2(-1, -1), v2(-1, 1), v2(1, -1)});
        CHECK_THROWS_AS(log_minkowski_solve(cone_measure(hex, true).measure(), {1e-12, 1, {}}), MaxIterations);
    }
}

TEST_CASE("K functional bounds") {
    const auto g = SphereGrid::circle(1024);
    const auto nu = cone_measure(ConvexBody::cube(2, 0.5)).measure();
    const std::vector<ConvexBody> cands{ConvexBody::cube(2), ConvexBody::cross_polytope(2), ConvexBody::ball(2)};
    const auto r = k_functional(nu, cands, g);
    CHECK(r.best_body == 0);
    CHECK(r.upper == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(r.consistent);
    CHECK(!r.unbounded);
    // eta_C of the minimizer closes the duality chain
    CHECK(std::fabs(r.upper - r.lower) <= r.tolerance + 2e-3);
    CHECK(r.best_eta == 0);

    const auto bad = atoms({v2(1, 0), v2(-1, 0), v2(0, 1), v2(0, -1)}, {0.4, 0.4, 0.1, 0.1});
    const auto u = k_functional(bad, cands, g);
    CHECK(u.unbounded);
    CHECK(std::isinf(u.upper));
    REQUIRE(u.descent.size() == 4);
    for (std::size_t i = 1; i < u.descent.size(); ++i) CHECK(u.descent[i] < u.descent[i - 1]);
}

TEST_CASE("K functional consistency over random hexagon measures") {
    const auto g = SphereGrid::circle(512);
    Rng rng(17);
    for (int t = 0; t < 5; ++t) {
        const auto nu = cone_measure(geometry::normalize_volume(symmetric_polygon(rng, 3))).measure();
        const auto r = k_functional(nu, {ConvexBody::cube(2), ConvexBody::ball(2), symmetric_polygon(rng, 4)}, g);
        CHECK(r.consistent);
    }
}

TEST_CASE("Kolesnikov transport inequality on the sphere") {
    const auto g1 = SphereGrid::circle(64);
    const auto s = SphericalMeasure::uniform(g1);
    const auto eq = kolesnikov_check(g1, s, s);
    CHECK(eq.verdict == Verdict::Equality);
    CHECK(eq.lhs == 0.0);

    const auto a = SphericalMeasure::from_density(g1, [](const Vec& u) { return std::fabs(u[0]); });
    const auto b = SphericalMeasure::from_density(g1, [](const Vec& u) { return std::fabs(u[1]); });
    const auto l = kolesnikov_check(g1, a, b);
    CHECK(l.verdict == Verdict::Holds);
    CHECK(l.gap > 0.0);

    // smoothed caps at +-e1 vs +-e2: shrinking the width raises both sides
    double prev_l = -1.0, prev_r = -1.0;
    const auto g = SphereGrid::circle(256);
    for (double w : {0.5, 0.3, 0.2}) {
        auto cap = [w](int axis) {
            return [w, axis](const Vec& u) { return std::exp(-(1 - u[axis] * u[axis]) / (w * w)); };
        };
        const auto r = kolesnikov_check(g, SphericalMeasure::from_density(g, cap(0)), SphericalMeasure::from_density(g, cap(1)));
        CHECK(r.verdict != Verdict::Violated);
        CHECK(r.lhs > prev_l);
        CHECK(r.rhs > prev_r);
        prev_l = r.lhs;
        prev_r = r.rhs;
    }

    const auto g2 = SphereGrid::icosahedral(2);
    const auto c = SphericalMeasure::from_density(g2, [](const Vec& u) { return 1 + 3 * u[2] * u[2]; });
    const auto k2 = kolesnikov_check(g2, c, SphericalMeasure::uniform(g2));
    CHECK(k2.verdict != Verdict::Violated);
    CHECK(k2.gap > 0.0);

    const auto asym = SphericalMeasure::from_density(g1, [](const Vec& u) { return 1.5 + u[0]; });
    CHECK(kolesnikov_check(g1, asym, s).verdict == Verdict::Skipped);
}

TEST_CASE("Oliker sandwich: dual lower bound and primal upper bound") {
    Rng rng(8);
    const auto g = SphereGrid::circle(64);
    for (int t = 0; t < 10; ++t) {
        const double p = rng.uniform(0.5, 3.0), q = rng.uniform(0.5, 3.0);
        const auto n1 = SphericalMeasure::from_density(g, [p](const Vec& u) { return 0.2 + std::pow(std::fabs(u[0]), p); });
        const auto n2 = SphericalMeasure::from_density(g, [q](const Vec& u) { return 0.2 + std::pow(std::fabs(u[1]), q); });
        const double T = transport_alpha(n1, n2, std::sin(1e-6));
        const auto C = symmetric_polygon(rng, 4);
        double dual = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            dual += -n1.weights[i] * std::log(geometry::support_function(C, g.nodes[i])) +
                    n2.weights[i] * std::log(geometry::radial_function(C, g.nodes[i]));
        CHECK(dual <= T + 1e-12);
        // any entropic plan is feasible up to its marginal residual
        const auto cost = transport::cost_alpha(n1.points, n2.points, std::sin(1e-6));
        const auto sk = transport::solve_sinkhorn(cost, n1.weights, n2.weights, {1e-3, 0.0, 200000, 1e-9});
        CHECK(T <= sk.plan.objective + 1e-6);
    }
}

TEST_CASE("polar volume identity on the sphere") {
    const auto g1 = SphereGrid::circle(2048);
    const auto g2 = SphereGrid::icosahedral(4);
    Mat A(2, 2);
    A << 2, 0.5, 0.5, 1;
    CHECK(polar_volume_product(ConvexBody::ellipsoid(A), g1) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(polar_volume_product(ConvexBody::ball(3), g2) == doctest::Approx(1.0).epsilon(1e-12));
    Rng rng(4);
    for (int t = 0; t < 10; ++t) CHECK(polar_volume_product(symmetric_polygon(rng, 3 + t % 3), g1) <= 1.0);
    CHECK(polar_volume_product(ConvexBody::cube(3), g2) <= 1.0);
    CHECK(polar_volume_product(ConvexBody::cross_polytope(3), g2) <= 1.0);
}

TEST_CASE("cube/cross identity with the (n+1) transport factor") {
    const auto t = mahler_identity(ConvexBody::cube(2));
    CHECK(t.transport == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(t.h_term == doctest::Approx(-2 * std::log(2.0)).epsilon(1e-12));
    CHECK(t.rho_term == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
    CHECK(std::fabs(t.value()) <= 1e-9);
}

TEST_CASE("unconditional LSI") {
    const auto g = SphereGrid::circle(1024);
    const auto cube = ConvexBody::cube(2, 0.5);
    const auto cross = geometry::normalize_volume(ConvexBody::cross_polytope(2));
    const auto eq = lsi_unconditional_check(cube, cross, g);
    CHECK(eq.verdict == Verdict::Equality);
    CHECK(eq.note.find("transport=0.69314718") != std::string::npos);

    const auto same = lsi_unconditional_check(cube, cube, g);
    CHECK(same.verdict == Verdict::Holds);
    CHECK(same.note.find("transport=0 ") != std::string::npos);

    Rng rng(21);
    for (int t = 0; t < 5; ++t) {
        const double a = rng.uniform(0.3, 3.0), b = rng.uniform(0.3, 3.0);
        const auto r = lsi_unconditional_check(geometry::normalize_volume(box(a, 1)), geometry::normalize_volume(box(1, b)), g);
        CHECK(r.verdict != Verdict::Violated);
    }
    const auto hex = geometry::normalize_volume(symmetric_polygon(rng, 3));
    CHECK(lsi_unconditional_check(hex, cube, g).verdict == Verdict::Skipped);
    CHECK_THROWS_AS(lsi_unconditional_check(ConvexBody::cube(2), cube, g), NotUnitVolume);
}

TEST_CASE("improved Mahler bound for unconditional bodies") {
    CHECK(improved_mahler_check(ConvexBody::cube(2)).verdict == Verdict::Equality);
    CHECK(improved_mahler_check(ConvexBody::cross_polytope(2)).verdict == Verdict::Equality);
    Rng rng(9);
    for (int t = 0; t < 10; ++t) {
        // unconditional octagons
        const double a = rng.uniform(0.2, 1.0), b = rng.uniform(0.2, 1.0);
        std::vector<Vec> v;
        for (double sx : {-1.0, 1.0})
            for (double sy : {-1.0, 1.0}) {
                v.push_back(v2(sx, sy * a));
                v.push_back(v2(sx * b, sy));
            }
        const auto r = improved_mahler_check(ConvexBody::from_vertices(v));
        CHECK(r.verdict != Verdict::Violated);
    }
    CHECK(improved_mahler_check(geometry::normalize_volume(symmetric_polygon(rng, 3))).verdict == Verdict::Skipped);
}

TEST_CASE("concentration ledgers") {
    const auto g = SphereGrid::circle(128);
    const std::vector<bool> all(g.size(), true);
    const auto full = concentration_ab_check(g, all, all);
    CHECK(full.verdict == Verdict::Equality);

    const auto A = symmetric_cap(g, v2(1, 0), kPi / 8);
    const auto B = symmetric_cap(g, v2(0, 1), kPi / 8);
    const auto ab = concentration_ab_check(g, A, B);
    CHECK(ab.lhs == doctest::Approx(1.0 / 16).epsilon(1e-12));
    CHECK(ab.verdict == Verdict::Holds);

    std::vector<bool> half(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) half[i] = std::fabs(g.nodes[i][0]) >= std::fabs(g.nodes[i][1]);
    const auto en = concentration_enlargement_check(g, half, kPi / 3);
    CHECK(en.verdict == Verdict::Holds);
    CHECK(en.rhs == doctest::Approx(0.5));

    const auto small = symmetric_cap(g, v2(1, 0), 0.2);
    CHECK(concentration_enlargement_check(g, small, 0.5).verdict == Verdict::Skipped);
    CHECK_THROWS_AS(concentration_ab_check(g, std::vector<bool>(g.size(), false), all), EmptySet);

    const auto g2 = SphereGrid::icosahedral(3);
    Rng rng(30);
    for (int t = 0; t < 10; ++t) {
        const auto c1 = rng.unit_vec(3), c2 = rng.unit_vec(3);
        const auto r = concentration_ab_check(g2, symmetric_cap(g2, c1, rng.uniform(0.1, 0.6)),
                                              symmetric_cap(g2, c2, rng.uniform(0.1, 0.6)));
        CHECK(r.verdict != Verdict::Violated);
    }
}

TEST_CASE("sphere Poincare inequality") {
    auto u1sq = [](const Vec& u) { return u[0] * u[0]; };
    auto grad = [](const Vec& u) {
        Vec g = Vec::Zero(u.size());
        g[0] = 2 * u[0];
        return g;
    };
    const auto s1 = sphere_poincare_check(SphereGrid::circle(256), u1sq, grad);
    CHECK(s1.verdict == Verdict::Equality);
    CHECK(s1.rhs / (s1.lhs / 4) == doctest::Approx(4.0).epsilon(1e-3));

    const auto s2 = sphere_poincare_check(SphereGrid::icosahedral(4), u1sq, grad);
    CHECK(s2.verdict == Verdict::Equality);
    // exact: Var = 4/45, Dirichlet = 8/15
    CHECK(s2.rhs == doctest::Approx(8.0 / 15).epsilon(1e-3));

    const auto fd = sphere_poincare_check(SphereGrid::icosahedral(3), u1sq);
    CHECK(fd.verdict == Verdict::Equality);

    const auto quartic = sphere_poincare_check(SphereGrid::circle(256), [](const Vec& u) { return std::pow(u[0], 4); });
    CHECK(quartic.verdict == Verdict::Holds);
    CHECK(sphere_poincare_check(SphereGrid::circle(16), [](const Vec& u) { return u[0]; }).verdict == Verdict::Skipped);
}

TEST_CASE("cap against the uniform measure is infeasible for alpha transport") {
    const auto g = SphereGrid::circle(128);
    const auto r = nonsym_cap_check(g, v2(1, 0), kPi / 6);
    CHECK(r.infeasible);
    CHECK(std::isfinite(r.entropy));
    CHECK(r.entropy == doctest::Approx(-std::log(r.cap_mass)).epsilon(1e-12));
    CHECK(r.enlarged < 1.0);
}

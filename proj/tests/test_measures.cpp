#include "doctest.h"

#include "santalo/measures.hpp"
#include "santalo/rng.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <sstream>

using namespace santalo;
using namespace santalo::measures;

namespace {

// int rho(|x|^2) dx by adaptive radial quadrature, n in {1, 2}.
template <class F>
double radial_oracle(F rho, int n, double R = kInf) {
    auto g = [&](double r) { return rho(r * r) * (n == 1 ? 2.0 : 2.0 * kPi * r); };
    if (std::isfinite(R)) return boost::math::quadrature::tanh_sinh<double>().integrate(g, 0.0, R);
    return boost::math::quadrature::exp_sinh<double>().integrate(g, 0.0, kInf);
}

std::vector<double> random_simplex(Rng& rng, std::size_t n, double floor = 0.0) {
    std::vector<double> p(n);
    double total = 0.0;
    for (auto& x : p) total += (x = floor + rng.uniform());
    for (auto& x : p) x /= total;
    return p;
}

}  // namespace

TEST_CASE("measures: normalization constants") {
    CHECK(WeightFunction::gaussian().normalization(1) == doctest::Approx(std::sqrt(2.0 * kPi)).epsilon(1e-14));
    CHECK(WeightFunction::cauchy(1.0).normalization(1) == doctest::Approx(kPi).epsilon(1e-14));
    CHECK(WeightFunction::barenblatt(0.5).normalization(1) == doctest::Approx(4.0 * std::sqrt(2.0) / 3.0).epsilon(1e-14));

    for (int n : {1, 2}) {
        auto check = [&](const WeightFunction& w) {
            CAPTURE(w.name());
            CAPTURE(n);
            const double exact = radial_oracle([&](double t) { return w(t); }, n, w.support_radius());
            CHECK(w.normalization(n) == doctest::Approx(exact).epsilon(1e-10));
        };
        check(WeightFunction::gaussian());
        check(WeightFunction::barenblatt(0.5));
        check(WeightFunction::barenblatt(0.1));
        check(WeightFunction::cauchy(1.5));
        check(WeightFunction::cauchy(3.0));
    }
    CHECK_THROWS_AS(WeightFunction::cauchy(1.0).normalization(2), DivergentIntegral);
}

TEST_CASE("measures: closed-form weight derivatives") {
    const double d = 1e-5;
    for (const auto& w : {WeightFunction::gaussian(), WeightFunction::barenblatt(0.3), WeightFunction::cauchy(1.7)}) {
        for (double t : {0.1, 0.7, 2.0}) {
            CAPTURE(w.name());
            CAPTURE(t);
            const double r0 = w(t), rp = w(t + d), rm = w(t - d);
            CHECK(w.dlog_rho(t) == doctest::Approx((rp - rm) / (2 * d) / r0).epsilon(1e-7));
            CHECK(w.d2_ratio(t) == doctest::Approx((rp - 2 * r0 + rm) / (d * d) / r0).epsilon(1e-4));
        }
    }
}

TEST_CASE("measures: tabulated weight reproduces the Cauchy weight") {
    const double beta = 1.5;
    auto exact = WeightFunction::cauchy(beta);
    auto table = WeightFunction::tabulate([&](double t) { return std::pow(1.0 + t, -beta); }, 1e-6, 1e8, 600);
    for (double t : {0.0, 1e-3, 0.5, 3.0, 40.0, 1e7, 1e9}) {
        CAPTURE(t);
        CHECK(table(t) == doctest::Approx(exact(t)).epsilon(1e-4));
    }
    for (double t : {0.05, 0.5, 3.0, 40.0}) {
        CAPTURE(t);
        CHECK(table.dlog_rho(t) == doctest::Approx(exact.dlog_rho(t)).epsilon(1e-3));
        CHECK(table.d2_ratio(t) == doctest::Approx(exact.d2_ratio(t)).epsilon(1e-2));
    }
    CHECK(table.normalization(1) == doctest::Approx(exact.normalization(1)).epsilon(1e-4));
    CHECK(check_admissible(table, 1).admissible);
    CHECK_FALSE(check_admissible(table, 3).admissible);

    auto back = WeightFunction::from_json(table.to_json());
    CHECK(back(2.5) == table(2.5));
    CHECK_THROWS_AS(WeightFunction::from_json({{"kind", "levy"}}), ConfigInvalid);
    CHECK_THROWS_AS(WeightFunction::from_json({{"kind", "cauchy"}}), ConfigInvalid);
    CHECK_THROWS_AS(WeightFunction::custom({1, 2, 3}, {1, 1, 1}), InvalidArgument);
}

TEST_CASE("measures: admissibility") {
    auto g = check_admissible(WeightFunction::gaussian());
    CHECK(g.admissible);
    CHECK(g.strictly_convex);
    auto c = check_admissible(WeightFunction::cauchy(1.0));
    CHECK(c.admissible);
    CHECK(c.strictly_convex);
    CHECK(check_admissible(WeightFunction::barenblatt(0.5)).admissible);

    auto bad = check_admissible(WeightFunction::cauchy(0.5), 1);
    CHECK_FALSE(bad.admissible);
    CHECK_FALSE(bad.integrable);
    CHECK(bad.monotone);
    CHECK_FALSE(check_admissible(WeightFunction::cauchy(0.9), 2).admissible);
    CHECK(check_admissible(WeightFunction::cauchy(1.1), 2).admissible);

    // v(t) ~ 3 log t for large t: monotone but eventually concave
    auto slow = WeightFunction::tabulate([](double t) { return std::pow(1.0 + std::log1p(t), -3.0); });
    auto r = check_admissible(slow);
    CHECK(r.monotone);
    CHECK_FALSE(r.convex);
    CHECK_FALSE(r.admissible);

    auto rising = WeightFunction::tabulate(
        [](double t) { return std::pow(1.0 + t, -2.0) * (1.0 + 10.0 * std::clamp(t - 1.0, 0.0, 1.0)); });
    CHECK_FALSE(check_admissible(rising).monotone);

    CHECK_THROWS_AS(mu_rho(WeightFunction::cauchy(0.5), GridSpec::line(-5, 5, 101)), NotAdmissible);
}

TEST_CASE("measures: mu_rho cell masses") {
    SUBCASE("gaussian captured mass") {
        const auto grid = GridSpec::line(-4, 4, 401);
        auto m = mu_rho(WeightFunction::gaussian(), grid);
        const double edge = 4.0 + 0.5 * grid.spacing(0);
        CHECK(m.Z == doctest::Approx(std::sqrt(2 * kPi)).epsilon(1e-14));
        CHECK(m.captured == doctest::Approx(std::erf(edge / std::sqrt(2.0))).epsilon(1e-12));
        m.measure.validate();
        CHECK(std::fabs(m.measure.mean()[0]) < 1e-15);
        // cell masses against the error function
        double err = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid.node(i)[0], h = grid.spacing(0);
            const double exact = 0.5 * (std::erf((x + h / 2) / std::sqrt(2.0)) - std::erf((x - h / 2) / std::sqrt(2.0)));
            err = std::max(err, std::fabs(m.measure.p[i] * m.captured - exact));
        }
        CHECK(err < 1e-14);
    }
    SUBCASE("barenblatt boundary cells") {
        const double s = 0.5;
        const auto grid = GridSpec::line(-2, 2, 401);
        auto m = mu_rho(WeightFunction::barenblatt(s), grid);
        CHECK(m.captured == doctest::Approx(1.0).epsilon(1e-7));
        auto F = [](double x) {  // antiderivative of (1 - x^2/2)_+
            x = std::clamp(x, -std::sqrt(2.0), std::sqrt(2.0));
            return x - x * x * x / 6.0;
        };
        double err = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid.node(i)[0], h = grid.spacing(0);
            err = std::max(err, std::fabs(m.measure.p[i] * m.captured * m.Z - (F(x + h / 2) - F(x - h / 2))));
        }
        CHECK(err < 1e-7);
    }
    SUBCASE("two dimensions") {
        const auto grid = GridSpec::square(-5, 5, 101);
        auto m = mu_rho(WeightFunction::gaussian(), grid);
        const double e = std::erf((5.0 + 0.5 * grid.spacing(0)) / std::sqrt(2.0));
        CHECK(m.captured == doctest::Approx(e * e).epsilon(1e-12));
        CHECK(m.measure.mean().norm() < 1e-15);
        CHECK(is_symmetric(m.measure));

        auto b = mu_rho(WeightFunction::barenblatt(0.25), grid);
        CHECK(b.captured == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("measures: relative entropy") {
    const auto grid = GridSpec::line(-8, 8, 400);  // no node at 0
    auto mu = mu_rho(WeightFunction::gaussian(), grid).measure;
    CHECK(relative_entropy(mu, mu) == 0.0);

    GridMeasure uniform{grid, std::vector<double>(grid.size(), 1.0 / grid.size()), std::nullopt};
    GridMeasure half = uniform;
    for (std::size_t i = 0; i < grid.size(); ++i) half.p[i] = i % 2 ? 2.0 / grid.size() : 0.0;
    CHECK(relative_entropy(half, uniform) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(relative_entropy(uniform, half) == kInf);

    GridMeasure right = mu;
    double total = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) total += (right.p[i] = grid.node(i)[0] > 0 ? mu.p[i] : 0.0);
    for (double& x : right.p) x /= total;
    CHECK(relative_entropy(right, mu) == doctest::Approx(std::log(2.0)).epsilon(1e-3));
    right.reference = mu.p;
    CHECK(relative_entropy(right) == doctest::Approx(relative_entropy(right, mu)).epsilon(1e-14));

    GridMeasure other{GridSpec::line(-8, 8, 401), std::vector<double>(401, 1.0 / 401), std::nullopt};
    CHECK_THROWS_AS(relative_entropy(other, mu), GridMismatch);
}

TEST_CASE("measures: entropy is jointly convex") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 5 + rng.below(40);
        auto p1 = random_simplex(rng, n), p2 = random_simplex(rng, n);
        auto q1 = random_simplex(rng, n, 0.05), q2 = random_simplex(rng, n, 0.05);
        std::vector<double> pm(n), qm(n);
        for (std::size_t i = 0; i < n; ++i) {
            pm[i] = 0.5 * (p1[i] + p2[i]);
            qm[i] = 0.5 * (q1[i] + q2[i]);
        }
        const double h1 = relative_entropy(p1, q1), h2 = relative_entropy(p2, q2);
        CHECK(h1 >= 0.0);
        CHECK(relative_entropy(pm, q1) <= 0.5 * (relative_entropy(p1, q1) + relative_entropy(p2, q1)) + 1e-14);
        CHECK(relative_entropy(pm, qm) <= 0.5 * (h1 + h2) + 1e-14);
    }
}

TEST_CASE("measures: symmetrization does not increase entropy") {
    Rng rng(12);
    const auto grid = GridSpec::line(-3, 3, 61);
    auto mu = mu_rho(WeightFunction::cauchy(1.0), grid).measure;
    REQUIRE(is_symmetric(mu, 1e-15));
    for (int trial = 0; trial < 50; ++trial) {
        GridMeasure m{grid, random_simplex(rng, grid.size()), std::nullopt};
        auto s = symmetrize(m);
        CHECK(is_symmetric(s));
        CHECK_FALSE(is_symmetric(m));
        CHECK(relative_entropy(s, mu) <= relative_entropy(m, mu) + 1e-14);
    }
    GridMeasure lopsided{GridSpec::line(-1, 2, 10), std::vector<double>(10, 0.1), std::nullopt};
    CHECK_THROWS_AS(symmetrize(lopsided), NotSymmetric);
}

TEST_CASE("measures: discrete measures") {
    DiscreteMeasure m;
    m.points = {Vec::Constant(2, 0.5), Vec::Constant(2, -0.5), Vec::Unit(2, 0)};
    m.weights = {0.25, 0.25, 0.5};
    m.validate();
    CHECK_FALSE(m.is_symmetric());
    auto s = symmetrize(m);
    s.validate();
    CHECK(s.size() == 4);
    CHECK(s.is_symmetric());
    CHECK(s.mean().norm() < 1e-16);

    DiscreteMeasure near = s;
    near.points[0][0] += 1e-10;
    CHECK(near.is_symmetric());
    near.points[0][0] += 1e-8;
    CHECK_FALSE(near.is_symmetric());
    DiscreteMeasure heavy = s;
    heavy.weights[0] += 1e-11;
    heavy.weights[1] -= 1e-11;
    CHECK_FALSE(heavy.is_symmetric());

    CHECK(relative_entropy(s, s) == 0.0);
    CHECK(relative_entropy(m, s) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-15));
    CHECK(relative_entropy(s, m) == kInf);
    std::stringstream ss;
    write_csv(ss, s);
    auto back = read_discrete_csv(ss);
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(back.points[i] == s.points[i]);
        CHECK(back.weights[i] == s.weights[i]);
    }
}

TEST_CASE("measures: gnomonic projection") {
    CHECK((gnomonic(Vec::Zero(2)) - Vec::Unit(3, 2)).norm() == 0.0);
    Vec one(1);
    one << 1.0;
    CHECK((gnomonic(one) - Vec::Constant(2, 1.0 / std::sqrt(2.0))).norm() < 1e-16);

    Rng rng(13);
    for (int i = 0; i < 100; ++i) {
        Vec x = rng.normal_vec(1 + i % 2) * 3.0;
        CHECK((gnomonic_inverse(gnomonic(x)) - x).norm() <= 1e-14 * std::max(1.0, x.norm()));
    }
    Vec eq(2);
    eq << 1.0, 0.0;
    DiscreteMeasure bad{{eq}, {1.0}};
    CHECK_THROWS_AS(gnomonic_push(bad, Gnomonic::ToPlane), EquatorPoint);
}

TEST_CASE("measures: gnomonic push of the Cauchy measure is uniform on the half circle") {
    // mu_{(n+1)/2} for n = 1 is the Cauchy weight with beta = 1
    const double L = 200.0;
    const auto grid = GridSpec::line(-L, L, 8001);
    auto mu = mu_rho(WeightFunction::cauchy(1.0), grid);
    auto pushed = gnomonic_push(to_discrete(mu.measure), Gnomonic::ToSphere);
    REQUIRE(pushed.size() == grid.size());

    // sigma_+ of the image arc of each cell: angle / pi
    const double h = grid.spacing(0);
    std::vector<double> sigma(grid.size());
    double total = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.node(i)[0];
        total += (sigma[i] = (std::atan(x + h / 2) - std::atan(x - h / 2)) / kPi);
        CHECK(std::fabs(pushed.points[i].norm() - 1.0) < 1e-15);
        CHECK(pushed.points[i][1] > 0.0);
    }
    CHECK(mu.captured == doctest::Approx(total).epsilon(1e-12));
    for (double& x : sigma) x /= total;
    CHECK(total_variation(pushed.weights, sigma) < 1e-3);
}

TEST_CASE("measures: Barenblatt profiles approach the Gaussian") {
    const auto grid = GridSpec::line(-6, 6, 241);
    auto gauss = mu_rho(WeightFunction::gaussian(), grid).measure;
    double last = kInf;
    for (double s : {0.5, 0.1, 0.02}) {
        auto b = mu_rho(WeightFunction::barenblatt(s), grid).measure;
        const double tv = total_variation(b.p, gauss.p);
        CAPTURE(s);
        CHECK(tv < last);
        last = tv;
    }
    CHECK(last < 0.02);
}

TEST_CASE("measures: CSV and sidecar") {
    const auto grid = GridSpec::line(-1, 1, 5);
    auto w = WeightFunction::barenblatt(0.5);
    auto mu = mu_rho(w, grid);
    mu.measure.reference = mu.measure.p;
    std::stringstream ss;
    write_csv(ss, mu.measure);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "x0,mass,reference");
    auto j = sidecar(mu.measure, w, mu.Z);
    CHECK(j["weight"]["kind"] == "barenblatt");
    CHECK(j["Z"].get<double>() == mu.Z);
    CHECK(grid_from_json(j["grid"]) == grid);
    CHECK_THROWS_AS(grid_from_json({{"dim", 1}}), ConfigInvalid);
}

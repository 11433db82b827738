#include "santalo/linearize.hpp"

#include "santalo/transport.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>

namespace santalo::linearize {

HRhoMatrix h_rho_matrix(const WeightFunction& w, const Vec& y) {
    const double s = y.squaredNorm();
    const double r1 = w.dlog_rho(s), r2 = w.d2_ratio(s);
    const double across = -2.0 * r1;
    const double along = 2.0 * (-r1 + (r1 * r1 - r2) * s);
    if (!std::isfinite(across) || !std::isfinite(along))
        throw OutsideBall("H_rho is undefined outside the support of the weight");
    if (!(across > 0.0)) throw NotStrictlyConvex(w.name() + ": v is not increasing at |y|^2 = " + format_double(s));
    if (s > 0.0 && !(along > 0.0))
        throw NotStrictlyConvex(w.name() + ": v is not strictly convex at |y|^2 = " + format_double(s));
    const Eigen::Index n = y.size();
    HRhoMatrix out{y, Mat(n, n)};
    out.H = 2.0 * (-r1 * Mat::Identity(n, n) + (r1 * r1 - r2) * y * y.transpose());
    return out;
}

namespace {

std::vector<Vec> directions(int n) {
    std::vector<Vec> out;
    if (n == 1) {
        out.push_back(Vec::Constant(1, 1.0));
        out.push_back(Vec::Constant(1, -1.0));
    } else if (n == 2) {
        for (int k = 0; k < 64; ++k) {
            Vec u(2);
            u << std::cos(2 * kPi * k / 64), std::sin(2 * kPi * k / 64);
            out.push_back(u);
        }
    } else {
        for (int i = 0; i < n; ++i) {
            out.push_back(Vec::Unit(n, i));
            out.push_back(-Vec::Unit(n, i));
            for (int j = i + 1; j < n; ++j)
                for (double a : {-1.0, 1.0})
                    for (double b : {-1.0, 1.0}) out.push_back((a * Vec::Unit(n, i) + b * Vec::Unit(n, j)) / std::sqrt(2.0));
        }
    }
    return out;
}

}  // namespace

TaylorReport taylor_check(const WeightFunction& w, const Vec& y, const std::vector<double>& radii) {
    if (radii.empty()) throw InvalidArgument("taylor_check needs radii");
    const Mat H = h_rho_matrix(w, y).H;
    TaylorReport rep;
    std::vector<double> r = radii;
    std::sort(r.begin(), r.end(), std::greater<>());
    for (double rad : r) {
        if (!(rad > 0.0)) throw InvalidArgument("radii must be positive");
        double worst = 0.0;
        for (const auto& u : directions(int(y.size()))) {
            const Vec h = rad * u;
            const Vec x = y + h;
            const double om = transport::omega(w, x, y, transport::OmegaVariant::Restricted);
            // rounding bound of the three log rho terms in omega
            const double noise = 8.0 * std::numeric_limits<double>::epsilon() *
                                 (2.0 * std::fabs(w.log_rho(x.dot(y))) + std::fabs(w.log_rho(x.squaredNorm())) +
                                  std::fabs(w.log_rho(y.squaredNorm())));
            worst = std::max(worst, std::max(0.0, std::fabs(om - 0.5 * h.dot(H * h)) - noise) / (rad * rad));
        }
        rep.radii.push_back(rad);
        rep.residual.push_back(worst);
    }
    rep.monotone = true;
    for (std::size_t i = 1; i < rep.residual.size(); ++i) {
        const double prev = rep.residual[i - 1], cur = rep.residual[i];
        if (prev > 0.0 ? !(cur < prev) : cur != 0.0) rep.monotone = false;
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < rep.radii.size(); ++i)
        if (rep.residual[i] > 0.0) {
            lx.push_back(std::log(rep.radii[i]));
            ly.push_back(std::log(rep.residual[i]));
        }
    if (lx.size() >= 2) {
        const double m = double(lx.size());
        const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
        const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        rep.order = sxy / sxx;
    }
    return rep;
}

GridFunction hopf_lax(const GridFunction& f, double eps, const WeightFunction& w) {
    f.grid.validate();
    if (f.values.size() != f.grid.size()) throw GridMismatch("values do not match the grid");
    const std::size_t N = f.grid.size();
    std::vector<Vec> x(N);
    std::vector<double> lr(N);
    for (std::size_t i = 0; i < N; ++i) {
        x[i] = f.grid.node(i);
        lr[i] = w.log_rho(x[i].squaredNorm());
    }
    GridFunction out{f.grid, std::vector<double>(N, kInf)};
    for (std::size_t j = 0; j < N; ++j) {
        if (!std::isfinite(lr[j])) continue;
        double best = kInf;
        for (std::size_t i = 0; i < N; ++i) {
            if (!std::isfinite(lr[i])) continue;
            const double xy = x[i].dot(x[j]);
            if (xy < 0.0) continue;
            const double c = i == j ? 0.0 : std::max(0.0, 2.0 * w.log_rho(xy) - (lr[i] + lr[j]));
            best = std::min(best, eps * f.values[i] + c);
        }
        out.values[j] = best;
    }
    return out;
}

std::vector<Vec> grid_gradient(const GridFunction& f) {
    const auto& g = f.grid;
    const std::size_t N = g.size();
    std::vector<Vec> out(N, Vec::Zero(g.dim));
    for (std::size_t i = 0; i < N; ++i) {
        const auto idx = g.multi_index(i);
        for (int a = 0; a < g.dim; ++a) {
            auto lo = idx, hi = idx;
            double span = 2.0;
            if (idx[a] == 0) {
                span = 1.0;
                ++hi[a];
            } else if (idx[a] == g.n[a] - 1) {
                span = 1.0;
                --lo[a];
            } else {
                --lo[a];
                ++hi[a];
            }
            out[i][a] = (f.values[g.flat_index(hi)] - f.values[g.flat_index(lo)]) / (span * g.spacing(a));
        }
    }
    return out;
}

namespace {

// Index of -x for every node of a grid symmetric about 0.
std::vector<std::size_t> reflection(const sconcave::GridSpec& g) {
    for (int a = 0; a < g.dim; ++a)
        if (std::fabs(g.lo[a] + g.hi[a]) > 1e-12 * (1.0 + std::fabs(g.hi[a])))
            throw InvalidArgument("grid is not symmetric about 0");
    std::vector<std::size_t> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto idx = g.multi_index(i);
        for (int a = 0; a < g.dim; ++a) idx[a] = g.n[a] - 1 - idx[a];
        out[i] = g.flat_index(idx);
    }
    return out;
}

// Even, mean-zero copy of f under the cell masses p.
std::vector<double> prepare_even(const GridFunction& f, const std::vector<double>& p) {
    const auto ref = reflection(f.grid);
    std::vector<double> v(f.values.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double a = f.values[i], b = f.values[ref[i]];
        if (std::fabs(a - b) > 1e-10 * (1.0 + std::fabs(a))) throw NotEven("f(x) != f(-x) at node " + std::to_string(i));
        v[i] = 0.5 * (a + b);
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) mean += p[i] * v[i];
    for (auto& x : v) x -= mean;
    return v;
}

}  // namespace

Ledger weighted_poincare_check(const GridFunction& f, const WeightFunction& w, double tol) {
    const std::string name = "weighted-poincare/" + w.name();
    const std::string prov = "Thm th:sharp_poincare: int f^2 dmu_rho <= 1/2 int H_rho^{-1} grad f . grad f dmu_rho, f even";
    if (f.values.size() != f.grid.size()) throw GridMismatch("values do not match the grid");
    if (w.kind() == measures::WeightKind::Barenblatt)
        return skipped_ledger(name, "hypothesis: Barenblatt weights are not smooth at the support edge", prov);
    const auto mu = measures::mu_rho(w, f.grid);
    const auto& p = mu.measure.p;
    GridFunction g{f.grid, prepare_even(f, p)};
    const auto grad = grid_gradient(g);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        if (p[i] == 0.0) continue;
        lhs += p[i] * g.values[i] * g.values[i];
        const Mat H = h_rho_matrix(w, g.grid.node(i)).H;
        rhs += 0.5 * p[i] * grad[i].dot(H.llt().solve(grad[i]));
    }
    return make_ledger(name, lhs, rhs, tol, prov,
                       "captured=" + format_double(mu.captured) + " ratio=" + format_double(lhs > 0 ? rhs / lhs : kInf));
}

std::vector<ChainRow> linearization_chain(const GridFunction& f, const WeightFunction& w,
                                          const std::vector<double>& epsilons) {
    if (f.values.size() != f.grid.size()) throw GridMismatch("values do not match the grid");
    const auto mu = measures::mu_rho(w, f.grid);
    const auto v = prepare_even(f, mu.measure.p);
    std::vector<ChainRow> rows;
    for (double eps : epsilons) {
        measures::GridMeasure plus = mu.measure, minus = mu.measure;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (eps * std::fabs(v[i]) > 1.0) throw InvalidArgument("1 +- eps f must stay nonnegative");
            plus.p[i] *= 1.0 + eps * v[i];
            minus.p[i] *= 1.0 - eps * v[i];
        }
        // the mean-zero projection leaves the total mass at 1 up to rounding
        for (auto* m : {&plus, &minus}) {
            const double t = std::accumulate(m->p.begin(), m->p.end(), 0.0);
            for (auto& x : m->p) x /= t;
        }
        transport::TalagrandSpec spec;
        spec.weight = w;
        spec.variant = transport::TalagrandVariant::Restricted;
        const auto l = transport::talagrand_check(spec, plus, minus, mu.measure);
        rows.push_back({eps, l.lhs, l.rhs, l.gap, l.gap / (eps * eps), l.tol, l.verdict});
    }
    return rows;
}

void write_chain_csv(std::ostream& os, const std::vector<ChainRow>& rows) {
    os << "eps,lhs,rhs,gap,normalized_gap,tol,verdict\n";
    for (const auto& r : rows)
        os << format_double(r.eps) << "," << format_double(r.lhs) << "," << format_double(r.rhs) << ","
           << format_double(r.gap) << "," << format_double(r.normalized_gap) << "," << format_double(r.tol) << ","
           << to_string(r.verdict) << "\n";
}

}  // namespace santalo::linearize

#include "santalo/transport.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

namespace santalo::transport {

// ------ costs

double CostMatrix::max_finite() const {
    double m = 0.0;
    for (Eigen::Index j = 0; j < c.cols(); ++j)
        for (Eigen::Index i = 0; i < c.rows(); ++i)
            if (std::isfinite(c(i, j))) m = std::max(m, std::fabs(c(i, j)));
    return m;
}

void CostMatrix::validate() const {
    for (Eigen::Index j = 0; j < c.cols(); ++j)
        for (Eigen::Index i = 0; i < c.rows(); ++i)
            if (std::isnan(c(i, j)) || c(i, j) == -kInf) throw InvalidArgument("cost matrix has NaN or -inf entries");
}

double omega(const WeightFunction& w, const Vec& x, const Vec& y, OmegaVariant variant) {
    double xy = x.dot(y);
    if (variant == OmegaVariant::Restricted && xy < 0.0) return kInf;
    xy = std::fabs(xy);
    const double lx = w.log_rho(x.dot(x)), ly = w.log_rho(y.dot(y));
    if (!std::isfinite(lx) || !std::isfinite(ly)) throw OutsideBall("point outside the support of the weight");
    return std::max(0.0, 2.0 * w.log_rho(xy) - (lx + ly));
}

double k_s(double s, const Vec& x, const Vec& y) {
    const double xx = x.dot(x), yy = y.dot(y);
    if (!(s * xx < 1.0) || !(s * yy < 1.0)) throw OutsideBall("point outside B_s");
    return (std::log1p(-s * x.dot(y)) - 0.5 * (std::log1p(-s * xx) + std::log1p(-s * yy))) / s;
}

double alpha(const Vec& u, const Vec& v, double margin) {
    if (u == v) return 0.0;
    const double uv = u.dot(v);
    if (!(uv > margin)) return kInf;
    return uv >= 1.0 ? 0.0 : -std::log(uv);
}

namespace {

void require_unit(const std::vector<Vec>& U) {
    for (const auto& u : U)
        if (std::fabs(u.norm() - 1.0) > 1e-10) throw NotUnit("point is not on the unit sphere");
}

template <class F>
CostMatrix assemble(const std::vector<Vec>& X, const std::vector<Vec>& Y, std::string provenance, F&& f) {
    CostMatrix c;
    c.provenance = std::move(provenance);
    c.c.resize(Eigen::Index(X.size()), Eigen::Index(Y.size()));
    for (std::size_t j = 0; j < Y.size(); ++j)
        for (std::size_t i = 0; i < X.size(); ++i) c.c(Eigen::Index(i), Eigen::Index(j)) = f(X[i], Y[j]);
    return c;
}

}  // namespace

CostMatrix cost_omega(const WeightFunction& w, const std::vector<Vec>& X, const std::vector<Vec>& Y,
                      OmegaVariant variant) {
    const int n = X.empty() ? 1 : int(X.front().size());
    const auto report = measures::check_admissible(w, n);
    if (!report.admissible) throw NotAdmissible(w.name() + ": " + report.failures.front());
    const std::string tag = variant == OmegaVariant::Restricted ? "omega" : "omega~";
    return assemble(X, Y, tag + "[" + w.name() + "]",
                    [&](const Vec& x, const Vec& y) { return omega(w, x, y, variant); });
}

CostMatrix cost_ks(double s, const std::vector<Vec>& X, const std::vector<Vec>& Y) {
    if (!(s > 0.0)) throw InvalidArgument("k_s needs s > 0");
    return assemble(X, Y, "k_s[s=" + format_double(s) + "]", [&](const Vec& x, const Vec& y) { return k_s(s, x, y); });
}

CostMatrix cost_alpha(const std::vector<Vec>& U, const std::vector<Vec>& V, double margin) {
    require_unit(U);
    require_unit(V);
    return assemble(U, V, "alpha", [&](const Vec& u, const Vec& v) { return alpha(u, v, margin); });
}

// ------ plans and duals

Mat TransportPlan::dense() const {
    Mat d = Mat::Zero(rows, cols);
    for (const auto& e : entries) d(e.i, e.j) += e.mass;
    return d;
}

std::vector<double> TransportPlan::row_sums() const {
    std::vector<double> r(rows, 0.0);
    for (const auto& e : entries) r[e.i] += e.mass;
    return r;
}

std::vector<double> TransportPlan::col_sums() const {
    std::vector<double> r(cols, 0.0);
    for (const auto& e : entries) r[e.j] += e.mass;
    return r;
}

double DualPotentials::objective(const std::vector<double>& p, const std::vector<double>& q) const {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) s += phi[i] * p[i];
    for (std::size_t j = 0; j < q.size(); ++j)
        if (q[j] > 0.0) s += psi[j] * q[j];
    return s;
}

double DualPotentials::max_violation(const CostMatrix& c) const {
    double v = -kInf;
    for (Eigen::Index j = 0; j < c.cols(); ++j)
        for (Eigen::Index i = 0; i < c.rows(); ++i)
            if (std::isfinite(c(i, j))) v = std::max(v, phi[i] + psi[j] - c(i, j));
    return v;
}

// ------ network simplex

namespace {

std::pair<std::vector<double>, std::vector<double>> normalized_marginals(const std::vector<double>& p,
                                                                         const std::vector<double>& q) {
    double sp = 0.0, sq = 0.0;
    for (double x : p) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("marginal masses must be nonnegative");
        sp += x;
    }
    for (double x : q) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("marginal masses must be nonnegative");
        sq += x;
    }
    if (!(sp > 0.0) || !(sq > 0.0)) throw DegenerateInput("zero total mass");
    if (std::fabs(sp - sq) > 1e-10) throw InvalidArgument("marginals differ in total mass by more than 1e-10");
    std::vector<double> a(p), b(q);
    for (double& x : a) x /= sp;
    for (double& x : b) x /= sq;
    return {a, b};
}

// Primal network simplex on supply nodes 0..m-1, demand nodes m..m+k-1 and
// an artificial root. The initial tree uses one artificial arc per node; a
// remaining artificial flow at the optimum means no finite plan exists.
// Entering arcs come from block pricing; the leaving arc is the last blocking
// arc met when the cycle is traversed from its apex in the direction of the
// entering arc, which keeps the tree strongly feasible and rules out cycling.
class NetworkSimplex {
public:
    NetworkSimplex(const CostMatrix& c, const std::vector<double>& p, const std::vector<double>& q)
        : m_(int(p.size())), k_(int(q.size())), nodes_(m_ + k_ + 1), root_(m_ + k_) {
        const double maxc = c.max_finite();
        big_ = (maxc + 1.0) * nodes_;
        eps_ = 1e-14 * big_;
        for (int j = 0; j < k_; ++j)
            for (int i = 0; i < m_; ++i)
                if (std::isfinite(c(i, j))) add_arc(i, m_ + j, c(i, j), 0.0);
        real_arcs_ = int(src_.size());

        parent_.assign(nodes_, -1);
        pred_.assign(nodes_, -1);
        depth_.assign(nodes_, 0);
        pi_.assign(nodes_, 0.0);
        first_child_.assign(nodes_, -1);
        next_.assign(nodes_, -1);
        prev_.assign(nodes_, -1);
        for (int v = 0; v < m_ + k_; ++v) {
            const double b = v < m_ ? p[v] : q[v - m_];
            const bool up = v < m_ && b > 0.0;
            const int a = up ? add_arc(v, root_, big_, b) : add_arc(root_, v, big_, v < m_ ? 0.0 : b);
            attach(v, root_, a);
            depth_[v] = 1;
            pi_[v] = up ? -big_ : big_;
        }
        block_ = std::max(10, int(std::sqrt(double(src_.size()))));
    }

    int run() {
        int iterations = 0;
        for (;;) {
            for (int e; (e = entering()) >= 0; ++iterations) pivot(e);
            // potentials drift under repeated subtree shifts; rebuild them
            // from the tree and resume if that exposes a negative arc
            refresh_potentials();
            if (entering() < 0) break;
        }
        return iterations;
    }

    bool feasible(double tol) const {
        for (std::size_t a = real_arcs_; a < src_.size(); ++a)
            if (flow_[a] > tol) return false;
        return true;
    }

    TransportPlan plan(const CostMatrix& c) const {
        TransportPlan t;
        t.rows = m_;
        t.cols = k_;
        double obj = 0.0;
        for (int a = 0; a < real_arcs_; ++a)
            if (flow_[a] > 0.0) {
                t.entries.push_back({src_[a], tgt_[a] - m_, flow_[a]});
                obj += flow_[a] * c(src_[a], tgt_[a] - m_);
            }
        std::sort(t.entries.begin(), t.entries.end(),
                  [](const PlanEntry& a, const PlanEntry& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
        t.objective = obj;
        return t;
    }

    DualPotentials duals(const std::vector<double>& p) const {
        DualPotentials d;
        d.phi.resize(m_);
        d.psi.resize(k_);
        for (int i = 0; i < m_; ++i) d.phi[i] = -pi_[i];
        for (int j = 0; j < k_; ++j) d.psi[j] = pi_[m_ + j];
        // remove the common artificial offset
        double shift = 0.0;
        for (int i = 0; i < m_; ++i) shift += p[i] * d.phi[i];
        for (double& x : d.phi) x -= shift;
        for (double& x : d.psi) x += shift;
        return d;
    }

private:
    int add_arc(int s, int t, double cost, double flow) {
        src_.push_back(s);
        tgt_.push_back(t);
        cost_.push_back(cost);
        flow_.push_back(flow);
        return int(src_.size()) - 1;
    }

    double reduced(int a) const { return cost_[a] + pi_[src_[a]] - pi_[tgt_[a]]; }

    int entering() {
        const int A = int(src_.size());
        double best = -eps_;
        int best_arc = -1, count = 0;
        for (int t = 0; t < A; ++t) {
            const int a = next_arc_;
            next_arc_ = next_arc_ + 1 == A ? 0 : next_arc_ + 1;
            const double rc = reduced(a);
            if (rc < best) {
                best = rc;
                best_arc = a;
            }
            if (++count == block_) {
                if (best_arc >= 0) return best_arc;
                count = 0;
            }
        }
        return best_arc;
    }

    void attach(int v, int par, int arc) {
        parent_[v] = par;
        pred_[v] = arc;
        prev_[v] = -1;
        next_[v] = first_child_[par];
        if (next_[v] >= 0) prev_[next_[v]] = v;
        first_child_[par] = v;
    }

    void detach(int v) {
        const int par = parent_[v];
        if (prev_[v] >= 0) next_[prev_[v]] = next_[v];
        else first_child_[par] = next_[v];
        if (next_[v] >= 0) prev_[next_[v]] = prev_[v];
        parent_[v] = -1;
    }

    void pivot(int e) {
        const int u = src_[e], w = tgt_[e];
        int a = u, b = w;
        while (a != b) {
            if (depth_[a] >= depth_[b]) a = parent_[a];
            else b = parent_[b];
        }
        const int join = a;

        // flow runs apex -> u along the first path, w -> apex along the second
        double delta = kInf;
        int out = -1;
        bool out_on_u_side = false;
        for (int v = u; v != join; v = parent_[v])
            if (src_[pred_[v]] == v && flow_[pred_[v]] < delta) {
                delta = flow_[pred_[v]];
                out = v;
                out_on_u_side = true;
            }
        for (int v = w; v != join; v = parent_[v])
            if (src_[pred_[v]] != v && flow_[pred_[v]] <= delta) {
                delta = flow_[pred_[v]];
                out = v;
                out_on_u_side = false;
            }
        if (out < 0) throw InvalidArgument("transport problem is unbounded");

        if (delta > 0.0) {
            flow_[e] += delta;
            for (int v = u; v != join; v = parent_[v]) flow_[pred_[v]] += src_[pred_[v]] == v ? -delta : delta;
            for (int v = w; v != join; v = parent_[v]) flow_[pred_[v]] += src_[pred_[v]] == v ? delta : -delta;
        }
        flow_[pred_[out]] = 0.0;

        // re-hang the subtree below the leaving arc from the entering arc
        const int x = out_on_u_side ? u : w;
        const int y = out_on_u_side ? w : u;
        const double shift = x == w ? reduced(e) : -reduced(e);
        int cur = x, new_parent = y, new_arc = e;
        for (;;) {
            const int old_parent = parent_[cur], old_arc = pred_[cur];
            detach(cur);
            attach(cur, new_parent, new_arc);
            if (cur == out) break;
            new_parent = cur;
            new_arc = old_arc;
            cur = old_parent;
        }
        stack_.assign(1, x);
        while (!stack_.empty()) {
            const int v = stack_.back();
            stack_.pop_back();
            depth_[v] = depth_[parent_[v]] + 1;
            pi_[v] += shift;
            for (int c = first_child_[v]; c >= 0; c = next_[c]) stack_.push_back(c);
        }
    }

    void refresh_potentials() {
        pi_[root_] = 0.0;
        stack_.assign(1, root_);
        while (!stack_.empty()) {
            const int v = stack_.back();
            stack_.pop_back();
            for (int c = first_child_[v]; c >= 0; c = next_[c]) {
                const int a = pred_[c];
                pi_[c] = src_[a] == c ? pi_[v] - cost_[a] : pi_[v] + cost_[a];
                stack_.push_back(c);
            }
        }
    }

    int m_, k_, nodes_, root_;
    int real_arcs_ = 0, block_ = 10, next_arc_ = 0;
    double big_ = 0.0, eps_ = 0.0;
    std::vector<int> src_, tgt_;
    std::vector<double> cost_, flow_;
    std::vector<int> parent_, pred_, depth_, first_child_, next_, prev_, stack_;
    std::vector<double> pi_;
};

}  // namespace

ExactResult solve_exact(const CostMatrix& c, const std::vector<double>& p_in, const std::vector<double>& q_in) {
    if (c.rows() != Eigen::Index(p_in.size()) || c.cols() != Eigen::Index(q_in.size()))
        throw InvalidArgument("cost matrix does not match the marginals");
    c.validate();
    const auto [p, q] = normalized_marginals(p_in, q_in);

    NetworkSimplex ns(c, p, q);
    ExactResult r;
    r.iterations = ns.run();
    r.plan = ns.plan(c);
    r.duals = ns.duals(p);
    if (!ns.feasible(1e-12)) {
        r.status = SolveStatus::Infeasible;
        r.plan.objective = kInf;
    }
    return r;
}

// ------ Sinkhorn

namespace {

double log_sum_exp(const double* v, int n) {
    double mx = -kInf;
    for (int i = 0; i < n; ++i) mx = std::max(mx, v[i]);
    if (mx == -kInf) return -kInf;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::exp(v[i] - mx);
    return mx + std::log(s);
}

}  // namespace

SinkhornResult solve_sinkhorn(const CostMatrix& c, const std::vector<double>& p_in, const std::vector<double>& q_in,
                              const SinkhornOptions& opt) {
    if (c.rows() != Eigen::Index(p_in.size()) || c.cols() != Eigen::Index(q_in.size()))
        throw InvalidArgument("cost matrix does not match the marginals");
    if (!(opt.epsilon > 0.0)) throw InvalidArgument("Sinkhorn needs epsilon > 0");
    c.validate();
    const auto [p, q] = normalized_marginals(p_in, q_in);
    const int m = int(p.size()), k = int(q.size());

    for (int i = 0; i < m; ++i) {
        bool any = false;
        for (int j = 0; j < k && !any; ++j) any = q[j] > 0.0 && std::isfinite(c(i, j));
        if (p[i] > 0.0 && !any) throw Infeasible("row " + std::to_string(i) + " has no finite cost entry");
    }
    for (int j = 0; j < k; ++j) {
        bool any = false;
        for (int i = 0; i < m && !any; ++i) any = p[i] > 0.0 && std::isfinite(c(i, j));
        if (q[j] > 0.0 && !any) throw Infeasible("column " + std::to_string(j) + " has no finite cost entry");
    }

    std::vector<double> f(m, 0.0), g(k, 0.0), buf(std::max(m, k));
    for (int i = 0; i < m; ++i)
        if (p[i] <= 0.0) f[i] = -kInf;
    for (int j = 0; j < k; ++j)
        if (q[j] <= 0.0) g[j] = -kInf;

    auto update_f = [&](double eps) {
        for (int i = 0; i < m; ++i) {
            if (p[i] <= 0.0) continue;
            for (int j = 0; j < k; ++j) buf[j] = std::isfinite(c(i, j)) ? (g[j] - c(i, j)) / eps : -kInf;
            f[i] = eps * (std::log(p[i]) - log_sum_exp(buf.data(), k));
        }
    };
    auto update_g = [&](double eps) {
        for (int j = 0; j < k; ++j) {
            if (q[j] <= 0.0) continue;
            for (int i = 0; i < m; ++i) buf[i] = std::isfinite(c(i, j)) ? (f[i] - c(i, j)) / eps : -kInf;
            g[j] = eps * (std::log(q[j]) - log_sum_exp(buf.data(), m));
        }
    };
    // rows are off after the g update; columns are exact
    auto row_residual = [&](double eps) {
        double r = 0.0;
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            if (p[i] > 0.0)
                for (int j = 0; j < k; ++j)
                    if (q[j] > 0.0 && std::isfinite(c(i, j))) s += std::exp((f[i] + g[j] - c(i, j)) / eps);
            r += std::fabs(s - p[i]);
        }
        return r;
    };

    SinkhornResult out;
    const double eps_final = opt.epsilon;
    double eps = opt.epsilon0 > 0.0 ? opt.epsilon0 : std::max(c.max_finite(), eps_final);
    for (;;) {
        const bool last = eps <= eps_final;
        if (last) eps = eps_final;
        const double tol = last ? opt.tol : std::max(opt.tol, 1e-6);
        double residual = kInf;
        int it = 0;
        for (; it < opt.max_iter; ++it) {
            update_f(eps);
            update_g(eps);
            if (it % 10 == 9 || it + 1 == opt.max_iter) {
                residual = row_residual(eps);
                if (!std::isfinite(residual)) throw Infeasible("Sinkhorn potentials diverged");
                if (residual <= tol) break;
            }
        }
        out.iterations += it + 1;
        if (last) {
            out.residual = residual;
            if (residual > tol) throw NotConverged(residual, "Sinkhorn at epsilon " + format_double(eps));
            break;
        }
        eps *= 0.5;
    }

    out.plan.rows = m;
    out.plan.cols = k;
    double obj = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) {
            if (p[i] <= 0.0 || q[j] <= 0.0 || !std::isfinite(c(i, j))) continue;
            const double mass = std::exp((f[i] + g[j] - c(i, j)) / eps_final);
            if (mass > 0.0) {
                out.plan.entries.push_back({i, j, mass});
                obj += mass * c(i, j);
            }
        }
    out.plan.objective = obj;
    return out;
}

SolveResult solve(const CostMatrix& c, const std::vector<double>& p, const std::vector<double>& q) {
    constexpr Eigen::Index kCap = 5000;
    SolveResult r;
    if (c.rows() <= kCap && c.cols() <= kCap) {
        r.exact = solve_exact(c, p, q);
        return r;
    }
    r.used_sinkhorn = true;
    r.warning = "instance " + std::to_string(c.rows()) + "x" + std::to_string(c.cols()) +
                " exceeds the exact solver cap; entropic plan with epsilon 1e-3";
    auto s = solve_sinkhorn(c, p, q);
    r.exact.plan = std::move(s.plan);
    r.exact.iterations = s.iterations;
    return r;
}

// ------ transport-entropy ledger

namespace {

std::string variant_name(TalagrandVariant v) {
    switch (v) {
    case TalagrandVariant::Unrestricted: return "unrestricted";
    case TalagrandVariant::Restricted: return "restricted";
    case TalagrandVariant::Cauchy: return "cauchy";
    case TalagrandVariant::Barenblatt: return "barenblatt";
    }
    return "";
}

std::string provenance_for(TalagrandVariant v) {
    switch (v) {
    case TalagrandVariant::Unrestricted:
        return "Thm Talagrand-noneven-mu (i): T_{omega~}(nu1,nu2) <= H(nu1|mu)+H(nu2|mu)";
    case TalagrandVariant::Restricted:
        return "Thm Talagrand-noneven-mu (ii): T_omega(nu1,nu2) <= H(nu1|mu)+H(nu2|mu), nu1, nu2 symmetric";
    case TalagrandVariant::Cauchy:
        return "Cor Cauchy: beta T_omega(nu1,nu2) <= H(nu1|mu_beta)+H(nu2|mu_beta), nu1, nu2 symmetric";
    case TalagrandVariant::Barenblatt:
        return "Thm Barenblatt: T_{k_s}(nu1,nu2) <= H(nu1|gamma_s)+H(nu2|gamma_s), one centered, supports in B_s";
    }
    return "";
}

// Per-cell Jensen gap log(mean rho) - mean log rho: the entropy a histogram
// density loses when its cell masses stand in for it.
std::vector<double> jensen_gaps(const GridMeasure& m, const WeightFunction& w, const std::vector<double>& mass) {
    std::vector<double> out(m.size(), 0.0);
    std::vector<int> cells;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (mass[i] > 0.0) cells.push_back(int(i));
    const auto mean_rho = measures::cell_integrals(m.grid, [&](const Vec& x) { return w(x.squaredNorm()); });
    const auto mean_log = measures::cell_integrals(m.grid, [&](const Vec& x) { return w.log_rho(x.squaredNorm()); });
    const double vol = m.cell_volume();
    for (int i : cells) out[i] = std::max(0.0, std::log(mean_rho[i] / vol) - mean_log[i] / vol);
    return out;
}

}  // namespace

Ledger talagrand_check(const TalagrandSpec& spec, const GridMeasure& nu1, const GridMeasure& nu2,
                       const GridMeasure& reference) {
    const std::string name = "talagrand/" + variant_name(spec.variant) + "/" + spec.weight.name();
    const std::string prov = provenance_for(spec.variant);
    if (!(nu1.grid == reference.grid) || !(nu2.grid == reference.grid))
        throw GridMismatch("talagrand_check needs nu1, nu2 and the reference on one grid");
    nu1.validate();
    nu2.validate();
    reference.validate();

    std::vector<Vec> X, Y;
    std::vector<double> p, q;
    for (std::size_t i = 0; i < nu1.size(); ++i)
        if (nu1.p[i] > 0.0) {
            X.push_back(nu1.grid.node(i));
            p.push_back(nu1.p[i]);
        }
    for (std::size_t i = 0; i < nu2.size(); ++i)
        if (nu2.p[i] > 0.0) {
            Y.push_back(nu2.grid.node(i));
            q.push_back(nu2.p[i]);
        }

    double coefficient = 1.0;
    CostMatrix cost;
    switch (spec.variant) {
    case TalagrandVariant::Unrestricted:
        cost = cost_omega(spec.weight, X, Y, OmegaVariant::Unrestricted);
        break;
    case TalagrandVariant::Restricted:
    case TalagrandVariant::Cauchy:
        if (!measures::is_symmetric(nu1)) return skipped_ledger(name, "hypothesis: nu1 is not symmetric", prov);
        if (!measures::is_symmetric(nu2)) return skipped_ledger(name, "hypothesis: nu2 is not symmetric", prov);
        if (spec.variant == TalagrandVariant::Restricted) {
            cost = cost_omega(spec.weight, X, Y, OmegaVariant::Restricted);
        } else {
            if (spec.weight.kind() != measures::WeightKind::Cauchy)
                throw InvalidArgument("the Cauchy variant needs a Cauchy weight");
            // omega-bar = omega_rho / beta on x.y > 0, +inf otherwise
            coefficient = spec.weight.param();
            cost = cost_omega(spec.weight, X, Y, OmegaVariant::Restricted);
            cost.c /= coefficient;
            for (std::size_t j = 0; j < Y.size(); ++j)
                for (std::size_t i = 0; i < X.size(); ++i)
                    if (!(X[i].dot(Y[j]) > 0.0)) cost.c(Eigen::Index(i), Eigen::Index(j)) = kInf;
            cost.provenance = "omega-bar[" + spec.weight.name() + "]";
        }
        break;
    case TalagrandVariant::Barenblatt: {
        if (spec.weight.kind() != measures::WeightKind::Barenblatt)
            throw InvalidArgument("the Barenblatt variant needs a Barenblatt weight");
        const double R = spec.weight.support_radius();
        for (const auto* pts : {&X, &Y})
            for (const auto& x : *pts)
                if (!(x.norm() < R)) return skipped_ledger(name, "hypothesis: support leaves B_s", prov);
        if (nu1.mean().norm() > spec.center_tol && nu2.mean().norm() > spec.center_tol)
            return skipped_ledger(name, "hypothesis: neither measure is centered", prov);
        cost = cost_ks(spec.weight.param(), X, Y);
        break;
    }
    }

    const auto res = solve_exact(cost, p, q);
    if (res.status == SolveStatus::Infeasible)
        return skipped_ledger(name, "Infeasible: no finite-cost coupling of the node atoms (T = +inf)", prov);
    const double T = res.plan.objective;
    const double h1 = measures::relative_entropy(nu1, reference);
    const double h2 = measures::relative_entropy(nu2, reference);

    // discretization slack: entropy lost to cell masses plus the cost change
    // over half a cell around the atoms the plan uses
    double slack_h = 0.0;
    {
        const auto j1 = jensen_gaps(nu1, spec.weight, nu1.p);
        const auto j2 = jensen_gaps(nu2, spec.weight, nu2.p);
        for (std::size_t i = 0; i < nu1.size(); ++i) slack_h += nu1.p[i] * j1[i] + nu2.p[i] * j2[i];
    }
    double slack_t = 0.0;
    {
        const int d = nu1.grid.dim;
        auto c_at = [&](const Vec& x, const Vec& y) {
            switch (spec.variant) {
            case TalagrandVariant::Unrestricted: return omega(spec.weight, x, y, OmegaVariant::Unrestricted);
            case TalagrandVariant::Restricted: return omega(spec.weight, x, y, OmegaVariant::Restricted);
            case TalagrandVariant::Cauchy:
                return x.dot(y) > 0.0 ? omega(spec.weight, x, y, OmegaVariant::Restricted) / coefficient : kInf;
            case TalagrandVariant::Barenblatt: {
                const double s = spec.weight.param();
                if (!(s * x.squaredNorm() < 1.0) || !(s * y.squaredNorm() < 1.0)) return kInf;
                return k_s(s, x, y);
            }
            }
            return kInf;
        };
        for (const auto& e : res.plan.entries) {
            double osc = 0.0;
            for (int a = 0; a < d; ++a) {
                const double half = 0.5 * nu1.grid.spacing(a);
                for (double sgn : {-1.0, 1.0}) {
                    Vec x = X[e.i], y = Y[e.j];
                    x[a] += sgn * half;
                    y[a] += sgn * half;
                    // shifts across the x.y = 0 boundary leave the feasible
                    // region and do not count
                    const double c0 = cost(e.i, e.j);
                    const double cx = c_at(x, Y[e.j]), cy = c_at(X[e.i], y);
                    osc = std::max(osc, (std::isfinite(cx) ? std::fabs(cx - c0) : 0.0) +
                                            (std::isfinite(cy) ? std::fabs(cy - c0) : 0.0));
                }
            }
            slack_t = std::max(slack_t, osc);
        }
        slack_t *= coefficient;
        if (std::isnan(slack_t)) slack_t = kInf;
    }

    std::ostringstream note;
    note << "T=" << format_double(T) << " H1=" << format_double(h1) << " H2=" << format_double(h2)
         << " slack_entropy=" << format_double(slack_h) << " slack_transport=" << format_double(slack_t)
         << " cost=" << cost.provenance;
    return make_ledger(name, coefficient * T, h1 + h2, 1e-6 + slack_h + slack_t, prov, note.str());
}

// ------ I/O

void write_plan_csv(std::ostream& os, const TransportPlan& plan) {
    os << "i,j,mass\n";
    for (const auto& e : plan.entries) os << e.i << "," << e.j << "," << format_double(e.mass) << "\n";
}

void write_duals_csv(std::ostream& os, const DualPotentials& d) {
    os << "side,index,potential\n";
    for (std::size_t i = 0; i < d.phi.size(); ++i) os << "phi," << i << "," << format_double(d.phi[i]) << "\n";
    for (std::size_t j = 0; j < d.psi.size(); ++j) os << "psi," << j << "," << format_double(d.psi[j]) << "\n";
}

namespace {

double json_number(const nlohmann::json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v;
        if (s == "inf" || s == "+inf" || s == "Infinity") return kInf;
    }
    throw ConfigInvalid(where + ": expected a number or \"inf\"");
}

std::vector<Vec> json_points(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigInvalid(where + ": expected a nonempty array of points");
    std::vector<Vec> pts;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& row = j[i];
        if (!row.is_array() || row.empty()) throw ConfigInvalid(where + "[" + std::to_string(i) + "]: expected a point");
        Vec x(Eigen::Index(row.size()));
        for (std::size_t a = 0; a < row.size(); ++a)
            x[Eigen::Index(a)] = json_number(row[a], where + "[" + std::to_string(i) + "]");
        pts.push_back(x);
    }
    return pts;
}

Mat read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cost.path: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            if (cell == "inf" || cell == "+inf") row.push_back(kInf);
            else {
                try {
                    row.push_back(std::stod(cell));
                } catch (const std::exception&) {
                    throw ConfigInvalid("cost.path: bad entry \"" + cell + "\" in " + path);
                }
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) throw ConfigInvalid("cost.path: ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigInvalid("cost.path: empty matrix in " + path);
    Mat m(Eigen::Index(rows.size()), Eigen::Index(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
    return m;
}

}  // namespace

Instance read_instance(const nlohmann::json& j, const std::string& base_dir) {
    if (!j.is_object()) throw ConfigInvalid("instance: expected an object");
    for (const char* key : {"cost", "p", "q"})
        if (!j.contains(key)) throw ConfigInvalid(std::string("instance: missing field \"") + key + "\"");
    Instance inst;
    try {
        inst.p = j["p"].get<std::vector<double>>();
        inst.q = j["q"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigInvalid("instance.p/q: expected arrays of numbers");
    }
    const auto& c = j["cost"];
    if (!c.is_object() || !c.contains("kind") || !c["kind"].is_string())
        throw ConfigInvalid("instance.cost: expected an object with a string field \"kind\"");
    const std::string kind = c["kind"];
    try {
        if (kind == "matrix") {
            if (c.contains("path")) {
                std::string path = c["path"];
                if (!path.empty() && path.front() != '/') path = base_dir + "/" + path;
                inst.cost.c = read_matrix_csv(path);
            } else if (c.contains("values") && c["values"].is_array() && !c["values"].empty()) {
                const auto& v = c["values"];
                inst.cost.c.resize(Eigen::Index(v.size()), Eigen::Index(v[0].size()));
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (!v[i].is_array() || v[i].size() != v[0].size())
                        throw ConfigInvalid("instance.cost.values: ragged rows");
                    for (std::size_t k = 0; k < v[i].size(); ++k)
                        inst.cost.c(Eigen::Index(i), Eigen::Index(k)) = json_number(v[i][k], "instance.cost.values");
                }
            } else {
                throw ConfigInvalid("instance.cost: matrix needs \"values\" or \"path\"");
            }
            inst.cost.provenance = "matrix";
        } else if (kind == "alpha") {
            inst.cost = cost_alpha(json_points(c.at("U"), "instance.cost.U"), json_points(c.at("V"), "instance.cost.V"));
        } else if (kind == "ks") {
            inst.cost = cost_ks(json_number(c.at("s"), "instance.cost.s"), json_points(c.at("X"), "instance.cost.X"),
                                json_points(c.at("Y"), "instance.cost.Y"));
        } else if (kind == "omega") {
            const std::string variant = c.value("variant", "restricted");
            if (variant != "restricted" && variant != "unrestricted")
                throw ConfigInvalid("instance.cost.variant: expected \"restricted\" or \"unrestricted\"");
            inst.cost = cost_omega(WeightFunction::from_json(c.at("weight")), json_points(c.at("X"), "instance.cost.X"),
                                   json_points(c.at("Y"), "instance.cost.Y"),
                                   variant == "restricted" ? OmegaVariant::Restricted : OmegaVariant::Unrestricted);
        } else {
            throw ConfigInvalid("instance.cost.kind: unknown kind \"" + kind + "\"");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("instance.cost: ") + e.what());
    }
    if (inst.cost.rows() != Eigen::Index(inst.p.size()) || inst.cost.cols() != Eigen::Index(inst.q.size()))
        throw ConfigInvalid("instance: cost matrix shape does not match p and q");
    return inst;
}

}  // namespace santalo::transport

// Runs the acceptance criteria through the harness and prints one
// "Criterion k: PASS|FAIL" line each. Exit status 1 when any criterion fails.

#include "santalo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace h = santalo::harness;
using santalo::Ledger;
using santalo::Verdict;
using json = nlohmann::json;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    double budget;  // seconds
    json config;
    std::function<Outcome(const h::RunReport&)> check;
};

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}
bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

std::vector<Ledger> select(const h::RunReport& r, const std::function<bool(const Ledger&)>& pred) {
    std::vector<Ledger> out;
    for (const auto& l : r.ledgers())
        if (pred(l)) out.push_back(l);
    return out;
}

const h::ExperimentReport& experiment(const h::RunReport& r, const std::string& name) {
    for (const auto& e : r.experiments)
        if (e.config.name == name) return e;
    throw std::runtime_error("missing experiment " + name);
}

std::string fmt(double x) { return santalo::format_double(x); }

// Every ledger has one of the verdicts; reports the first offender.
Outcome all_verdicts(const std::vector<Ledger>& ls, std::initializer_list<Verdict> ok, std::size_t expected_count) {
    Outcome o;
    if (ls.size() != expected_count) {
        o.pass = false;
        o.detail = "expected " + std::to_string(expected_count) + " ledgers, got " + std::to_string(ls.size());
        return o;
    }
    for (const auto& l : ls) {
        bool good = false;
        for (auto v : ok) good |= l.verdict == v;
        if (!good) {
            o.pass = false;
            o.detail = l.name + " is " + santalo::to_string(l.verdict) + " (lhs=" + fmt(l.lhs) + " rhs=" + fmt(l.rhs) +
                       " tol=" + fmt(l.tol) + (l.note.empty() ? "" : " " + l.note) + ")";
            return o;
        }
    }
    o.detail = std::to_string(ls.size()) + " ledgers";
    return o;
}

Outcome both(Outcome a, const Outcome& b) {
    if (!a.pass) return a;
    if (!b.pass) return b;
    a.detail += "; " + b.detail;
    return a;
}

std::vector<Criterion> criteria() {
    std::vector<Criterion> c;
    c.push_back({1, 60, {{"kind", "mahler-hanner"}, {"params", {{"dims", {2, 3, 4}}, {"rel_tol", 1e-9}}}},
                 [](const h::RunReport& r) {
                     const auto exact = select(r, [](const Ledger& l) { return ends_with(l.name, "/exact"); });
                     Outcome o = all_verdicts(r.ledgers(), {Verdict::Equality}, 2 * exact.size());
                     for (const auto& l : exact)
                         if (l.gap != 0.0) return Outcome{false, l.name + " exact gap " + fmt(l.gap)};
                     o.detail += ", exact path gap 0 on " + std::to_string(exact.size()) + " trees";
                     return o;
                 }});
    c.push_back({2, 60,
                 {{"experiments",
                   {{{"kind", "bs-random"}, {"seed", 37}, {"params", {{"count", 100}, {"dims", {2, 3}}}}},
                    {{"kind", "bs-fixtures"}}}}},
                 [](const h::RunReport& r) {
                     auto random = select(r, [](const Ledger& l) { return l.name.rfind("bs-random/", 0) == 0; });
                     auto ell = select(r, [](const Ledger& l) {
                         return contains(l.name, "/ellipsoid") || contains(l.name, "/ball");
                     });
                     Outcome o = both(all_verdicts(random, {Verdict::Holds}, 100), all_verdicts(ell, {Verdict::Equality}, 4));
                     for (const auto& l : ell)
                         if (std::fabs(l.gap) > 1e-6 * l.rhs) return Outcome{false, l.name + " gap " + fmt(l.gap)};
                     auto rest = select(r, [](const Ledger& l) { return l.name.rfind("bs-fixtures/", 0) == 0; });
                     return both(o, all_verdicts(rest, {Verdict::Holds, Verdict::Equality}, 8));
                 }});
    c.push_back({3, 60, {{"kind", "santalo-triangle"}, {"params", {{"grid", 401}, {"residual_tol", 1e-6}}}},
                 [](const h::RunReport& r) {
                     Outcome o = all_verdicts(r.ledgers(), {Verdict::Holds, Verdict::Equality}, 4);
                     if (o.pass) o.detail += ", residual " + fmt(experiment(r, "santalo-triangle").result.metrics["residual"]);
                     return o;
                 }});
    c.push_back({4, 60, {{"kind", "cs-constants"}, {"params", {{"s", {0.0, 0.25, 0.5, 1.0}}, {"dims", {1, 2}}, {"rel_tol", 1e-6}}}},
                 [](const h::RunReport& r) { return all_verdicts(r.ledgers(), {Verdict::Equality}, 9); }});
    c.push_back({5, 60, {{"kind", "ps-hanner"}}, [](const h::RunReport& r) {
                     Outcome o = all_verdicts(r.ledgers(), {Verdict::Equality}, 3);
                     o.detail += "; values " + experiment(r, "ps-hanner").result.metrics.dump();
                     return o;
                 }});
    c.push_back({6, 60, {{"kind", "triple-dual"}, {"seed", 53}, {"params", {{"s", {0.0, 0.5, 1.0}}, {"per_s", 10}}}},
                 [](const h::RunReport& r) {
                     Outcome o = all_verdicts(r.ledgers(), {Verdict::Holds, Verdict::Equality}, 30);
                     o.detail += ", max error " + fmt(experiment(r, "triple-dual").result.metrics["max_error"]);
                     return o;
                 }});
    c.push_back({7, 60, {{"kind", "ot-cross"}, {"seed", 8}, {"params", {{"count", 20}, {"objective_tol", 1e-3}, {"dual_gap_tol", 1e-8}}}},
                 [](const h::RunReport& r) {
                     Outcome o = all_verdicts(r.ledgers(), {Verdict::Holds, Verdict::Equality}, 40);
                     o.detail += "; " + experiment(r, "ot-cross").result.metrics.dump();
                     return o;
                 }});
    c.push_back({8, 60, {{"kind", "talagrand-equality"}, {"params", {{"s", 0.5}, {"beta", 1.0}}}},
                 [](const h::RunReport& r) {
                     Outcome o;
                     for (const std::string n : {"gaussian/restricted", "barenblatt(s=0.5)/barenblatt", "cauchy(beta=1)/cauchy"}) {
                         bool found = false;
                         for (const auto& l : r.ledgers())
                             if (ends_with(l.name, n)) {
                                 found = true;
                                 if (l.lhs != 0.0 || l.rhs != 0.0 || l.verdict != Verdict::Equality)
                                     return Outcome{false, l.name + " lhs=" + fmt(l.lhs) + " rhs=" + fmt(l.rhs)};
                             }
                         if (!found) return Outcome{false, "no ledger " + n};
                     }
                     o.detail = "lhs = rhs = 0 for Gaussian, Barenblatt(1/2), Cauchy(1)";
                     return o;
                 }});
    c.push_back({9, 60, {{"kind", "talagrand-random"}, {"seed", 61}, {"params", {{"pairs", 50}}}},
                 [](const h::RunReport& r) {
                     Outcome o = all_verdicts(r.ledgers(), {Verdict::Holds, Verdict::Equality}, 150);
                     o.detail += ", min gap " + fmt(experiment(r, "talagrand-random").result.metrics["min_gap"]);
                     return o;
                 }});
    c.push_back({10, 60, {{"kind", "barenblatt-centered"}, {"seed", 67}, {"params", {{"pairs", 30}}}},
                 [](const h::RunReport& r) { return all_verdicts(r.ledgers(), {Verdict::Holds, Verdict::Equality}, 30); }});
    c.push_back({11, 60, {{"kind", "nonsym-cap"}}, [](const h::RunReport& r) {
                     const auto& m = experiment(r, "nonsym-cap").result.metrics;
                     const double H = m["entropy"];
                     if (!m["infeasible"].get<bool>()) return Outcome{false, "transport reported feasible"};
                     if (!std::isfinite(H)) return Outcome{false, "entropy not finite"};
                     Outcome o = all_verdicts(r.ledgers(), {Verdict::Holds, Verdict::Equality}, 3);
                     o.detail += ", Infeasible with H = -log sigma(A) = " + fmt(H);
                     return o;
                 }});
    c.push_back({12, 60, {{"kind", "kolesnikov"}, {"seed", 71}, {"params", {{"pairs", 30}, {"spheres", {"s1", "s2"}}}}},
                 [](const h::RunReport& r) {
                     auto eq = select(r, [](const Ledger& l) { return ends_with(l.name, "/sigma-sigma"); });
                     auto rest = select(r, [](const Ledger& l) { return !ends_with(l.name, "/sigma-sigma"); });
                     return both(all_verdicts(rest, {Verdict::Holds, Verdict::Equality}, 60),
                                 all_verdicts(eq, {Verdict::Equality}, 2));
                 }});
    c.push_back({13, 60, {{"kind", "sphere-poincare"}}, [](const h::RunReport& r) {
                     const auto& ratio = experiment(r, "sphere-poincare").result.metrics["ratio"];
                     const double r1 = ratio["s1"], r2 = ratio["s2"];
                     Outcome o;
                     o.pass = std::fabs(r1 - 4.0) <= 1e-3 && std::fabs(r2 - 6.0) <= 1e-3;
                     o.detail = "ratio S^1 " + fmt(r1) + ", S^2 " + fmt(r2);
                     return o;
                 }});
    c.push_back({14, 60, {{"kind", "weighted-poincare"}, {"seed", 6}, {"params", {{"random", 20}, {"tol", 5e-3}}}},
                 [](const h::RunReport& r) {
                     auto eq = select(r, [](const Ledger& l) { return ends_with(l.name, "/x^2-1"); });
                     if (eq.size() != 1) return Outcome{false, "missing x^2-1 ledger"};
                     const auto& l = eq.front();
                     if (l.verdict != Verdict::Equality || std::fabs(l.lhs - 2) > 1e-2 || std::fabs(l.rhs - 2) > 1e-2)
                         return Outcome{false, "x^2-1: lhs=" + fmt(l.lhs) + " rhs=" + fmt(l.rhs)};
                     auto random = select(r, [](const Ledger& x) { return contains(x.name, "/random"); });
                     Outcome o = all_verdicts(random, {Verdict::Holds, Verdict::Equality}, 20);
                     o.detail = "x^2-1: lhs=" + fmt(l.lhs) + " rhs=" + fmt(l.rhs) + "; " + o.detail;
                     return o;
                 }});
    c.push_back({15, 60, {{"kind", "taylor"}, {"params", {{"radii", {1e-1, 1e-2, 1e-3}}}}},
                 [](const h::RunReport& r) {
                     const auto& m = experiment(r, "taylor").result.metrics;
                     Outcome o;
                     for (const std::string w : {"gaussian", "cauchy1"})
                         if (!m[w]["monotone"].get<bool>()) o.pass = false;
                     o.detail = "gaussian " + m["gaussian"]["residual"].dump() + ", cauchy " + m["cauchy1"]["residual"].dump();
                     return o;
                 }});
    c.push_back({16, 300, {{"kind", "cone-measures"}, {"seed", 2024}, {"params", {{"samples", 1000000}, {"sigmas", 3.0}}}},
                 [](const h::RunReport& r) {
                     auto exact = select(r, [](const Ledger& l) { return ends_with(l.name, "/exact"); });
                     auto mc = select(r, [](const Ledger& l) { return ends_with(l.name, "/monte-carlo"); });
                     return both(all_verdicts(exact, {Verdict::Equality}, 4),
                                 all_verdicts(mc, {Verdict::Holds, Verdict::Equality}, 5));
                 }});
    c.push_back({17, 60, {{"kind", "log-minkowski"}, {"params", {{"tol", 1e-5}}}},
                 [](const h::RunReport& r) { return all_verdicts(r.ledgers(), {Verdict::Holds, Verdict::Equality}, 3); }});
    c.push_back({18, 60, {{"kind", "lsi-unconditional"}, {"params", {{"tol", 5e-3}}}},
                 [](const h::RunReport& r) { return all_verdicts(r.ledgers(), {Verdict::Equality}, 4); }});
    c.push_back({19, 60, {{"kind", "improved-mahler"}, {"seed", 9}, {"params", {{"count", 20}, {"tol", 1e-6}}}},
                 [](const h::RunReport& r) { return all_verdicts(r.ledgers(), {Verdict::Holds, Verdict::Equality}, 20); }});
    c.push_back({20, 60, {{"kind", "concentration"}, {"seed", 30}, {"params", {{"geometries", 50}}}},
                 [](const h::RunReport& r) { return all_verdicts(r.ledgers(), {Verdict::Holds, Verdict::Equality}, 200); }});
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    int failed = 0;
    for (const auto& crit : criteria()) {
        if (!only.empty() && std::find(only.begin(), only.end(), crit.id) == only.end()) continue;
        Outcome o;
        double seconds = 0.0;
        try {
            const auto report = h::run(h::parse_config(crit.config.dump(), "criterion " + std::to_string(crit.id)));
            seconds = report.seconds;
            for (const auto& e : report.experiments)
                if (!e.error.empty()) throw std::runtime_error(e.config.name + ": " + e.error);
            o = crit.check(report);
            if (seconds > crit.budget) {
                o.pass = false;
                o.detail += "; over the " + fmt(crit.budget) + " s budget";
            }
        } catch (const std::exception& e) {
            o = {false, e.what()};
        }
        char time[32];
        std::snprintf(time, sizeof time, "%.1f s", seconds);
        std::cout << "Criterion " << crit.id << ": " << (o.pass ? "PASS" : "FAIL") << " (" << time << ") " << o.detail
                  << std::endl;
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}

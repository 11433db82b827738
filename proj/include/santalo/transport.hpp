#pragma once

#include "santalo/common.hpp"
#include "santalo/ledger.hpp"
#include "santalo/measures.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace santalo::transport {

using measures::DiscreteMeasure;
using measures::GridMeasure;
using measures::WeightFunction;

// Extended-real cost; +inf entries are forbidden arcs.
struct CostMatrix {
    Mat c;
    std::string provenance;

    Eigen::Index rows() const { return c.rows(); }
    Eigen::Index cols() const { return c.cols(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return c(i, j); }
    double max_finite() const;
    void validate() const;  // no NaN, no -inf
};

enum class OmegaVariant { Restricted, Unrestricted };

// log(rho(x.y)^2 / (rho(|x|^2) rho(|y|^2))); the restricted variant is +inf
// where x.y < 0 and the unrestricted one uses |x.y|.
double omega(const WeightFunction& w, const Vec& x, const Vec& y, OmegaVariant variant);
// (1/s) log((1 - s x.y) / sqrt((1 - s|x|^2)(1 - s|y|^2)))
double k_s(double s, const Vec& x, const Vec& y);
// -log(u.v) for u.v > margin, else +inf
double alpha(const Vec& u, const Vec& v, double margin = 0.0);

CostMatrix cost_omega(const WeightFunction& w, const std::vector<Vec>& X, const std::vector<Vec>& Y,
                      OmegaVariant variant);
CostMatrix cost_ks(double s, const std::vector<Vec>& X, const std::vector<Vec>& Y);
// margin: pairs with u.v <= margin get +inf (nodes numerically orthogonal)
CostMatrix cost_alpha(const std::vector<Vec>& U, const std::vector<Vec>& V, double margin = 0.0);

struct PlanEntry {
    int i = 0, j = 0;
    double mass = 0.0;
};

struct TransportPlan {
    int rows = 0, cols = 0;
    std::vector<PlanEntry> entries;  // nonzero masses only
    double objective = 0.0;

    Mat dense() const;
    std::vector<double> row_sums() const;
    std::vector<double> col_sums() const;
};

struct DualPotentials {
    std::vector<double> phi, psi;
    double objective(const std::vector<double>& p, const std::vector<double>& q) const;
    // max over finite entries of phi_i + psi_j - c_ij
    double max_violation(const CostMatrix& c) const;
};

enum class SolveStatus { Optimal, Infeasible };

struct ExactResult {
    SolveStatus status = SolveStatus::Optimal;
    TransportPlan plan;  // objective +inf when infeasible
    DualPotentials duals;
    int iterations = 0;
};

// Network simplex on the bipartite transportation graph. Forbidden arcs are
// not part of the graph. Masses must agree within 1e-10 and are renormalized.
ExactResult solve_exact(const CostMatrix& c, const std::vector<double>& p, const std::vector<double>& q);

struct SinkhornOptions {
    double epsilon = 1e-3;  // final regularization
    double epsilon0 = 0.0;  // first stage; 0 picks the largest finite cost
    int max_iter = 200000;  // per stage
    double tol = 1e-9;      // marginal residual (l1)
};
struct SinkhornResult {
    TransportPlan plan;
    double residual = 0.0;
    int iterations = 0;
};
// Log-domain Sinkhorn with epsilon halving down to options.epsilon; +inf
// entries have zero kernel weight. Throws Infeasible when a row or column
// has no finite entry and NotConverged when a stage exhausts max_iter.
SinkhornResult solve_sinkhorn(const CostMatrix& c, const std::vector<double>& p, const std::vector<double>& q,
                              const SinkhornOptions& options = {});

// Exact up to 5000 x 5000, entropic beyond with a note in `warning`.
struct SolveResult {
    ExactResult exact;
    bool used_sinkhorn = false;
    std::string warning;
};
SolveResult solve(const CostMatrix& c, const std::vector<double>& p, const std::vector<double>& q);

enum class TalagrandVariant {
    Unrestricted,  // T_{omega~} <= H1 + H2 for all pairs
    Restricted,    // T_omega <= H1 + H2 for symmetric pairs
    Cauchy,        // beta T_omega-bar <= H1 + H2, symmetric pairs, Cauchy reference
    Barenblatt,    // T_{k_s} <= H1 + H2, one measure centered, supports in B_s
};

struct TalagrandSpec {
    WeightFunction weight = WeightFunction::gaussian();
    TalagrandVariant variant = TalagrandVariant::Restricted;
    double center_tol = 1e-9;
};

// Atoms at the nodes carrying mass; entropies against the reference masses.
// Hypothesis failures give Skipped rows. The tolerance is 1e-6 plus the
// discretization slack described in the note.
Ledger talagrand_check(const TalagrandSpec& spec, const GridMeasure& nu1, const GridMeasure& nu2,
                       const GridMeasure& reference);

void write_plan_csv(std::ostream& os, const TransportPlan& plan);
void write_duals_csv(std::ostream& os, const DualPotentials& d);

struct Instance {
    CostMatrix cost;
    std::vector<double> p, q;
};
// {"cost": {"kind": "matrix", "values": [[..]] | "path": "c.csv"} |
//          {"kind": "alpha", "U": [[..]], "V": [[..]]} |
//          {"kind": "ks", "s": .., "X": .., "Y": ..} |
//          {"kind": "omega", "weight": {..}, "variant": "restricted", "X": .., "Y": ..},
//  "p": [..], "q": [..]}
// Relative paths resolve against base_dir; "inf" strings mark forbidden entries.
Instance read_instance(const nlohmann::json& j, const std::string& base_dir = ".");

}  // namespace santalo::transport

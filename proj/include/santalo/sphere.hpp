#pragma once

#include "santalo/common.hpp"
#include "santalo/geometry.hpp"
#include "santalo/ledger.hpp"
#include "santalo/rng.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace santalo::sphere {

using geometry::ConvexBody;

// Nodes on S^n (n = 1, 2) with quadrature weights summing to 1. Both
// u -> -u and the reflection of the last coordinate permute the nodes.
//   S^1: 2N angles (k + 1/2) pi / N, equal weights
//   S^2: icosahedral geodesic grid, weights from the barycentric dual cells
struct SphereGrid {
    int n = 1;
    std::vector<Vec> nodes;
    std::vector<double> weights;
    std::vector<int> antipode;  // index of -u
    std::vector<int> mirror;    // index of (u_1, ..., -u_{n+1})
    double mesh = 0.0;  // max angle from a node to its nearest neighbour
    nlohmann::json spec;

    static SphereGrid circle(int half_count);  // 2 * half_count nodes
    static SphereGrid icosahedral(int level);  // 10 * 4^level + 2 nodes

    std::size_t size() const { return nodes.size(); }
    int ambient_dim() const { return n + 1; }
    double integrate(const std::function<double(const Vec&)>& f) const;
    void validate() const;
};

SphereGrid grid_from_json(const nlohmann::json& j);
void write_csv(std::ostream& os, const SphereGrid& g);

// Atoms on the sphere. Densities on a grid are stored as node atoms with the
// normalized cell masses.
struct SphericalMeasure {
    std::vector<Vec> points;
    std::vector<double> weights;

    static SphericalMeasure from_density(const SphereGrid& g, const std::function<double(const Vec&)>& density);
    static SphericalMeasure uniform(const SphereGrid& g);
    std::size_t size() const { return points.size(); }
    int ambient_dim() const { return points.empty() ? 0 : int(points.front().size()); }
    bool is_symmetric(double point_tol = 1e-9, double weight_tol = 1e-12) const;
    void validate() const;
};

// H(nu | sigma) for a measure carried by the grid nodes: sum m log(m / w).
double relative_entropy(const SphereGrid& g, const SphericalMeasure& nu);

struct ConeMeasure {
    std::vector<Vec> normals;
    std::vector<double> masses;
    SphericalMeasure measure() const { return {normals, masses}; }
};

// lambda_i = h_C(u_i) |F_i| / ((n+1) |C|) over the facets of a symmetric
// polytope of unit volume; auto_rescale normalizes the volume first.
ConeMeasure cone_measure(const ConvexBody& C, bool auto_rescale = false);
// Facet frequencies of the Gauss map of the radial projection of uniform
// points in C (rejection sampling from the bounding box).
std::vector<double> cone_measure_monte_carlo(const ConvexBody& C, long samples, Rng& rng);

enum class ConcentrationStatus { Strict, Equality, Violated };
std::string to_string(ConcentrationStatus s);

struct SubspaceReport {
    ConcentrationStatus status = ConcentrationStatus::Strict;
    std::vector<double> max_mass;  // per subspace dimension k = 1..n
    std::vector<double> slack;     // k/(n+1) - max_mass
    std::string detail;
    Mat witness;  // basis of the subspace deciding a Violated or Equality status
};
// Enumerates the subspaces spanned by atom subsets.
SubspaceReport subspace_concentration_check(const SphericalMeasure& nu, double tol = 1e-9);

// int log h_C dnu
double phi_nu(const SphericalMeasure& nu, const ConvexBody& C);

struct LogMinkowskiOptions {
    double tol = 1e-7;  // cone-measure total variation
    int max_iter = 20000;
    std::vector<double> initial_h;  // support numbers; empty means all ones
};
struct LogMinkowskiResult {
    ConvexBody body;
    std::vector<double> h;  // support numbers at the atoms, unit volume
    double residual = 0.0;  // TV(cone measure, nu)
    int iterations = 0;
    std::string warning;
};
// Minimizes Phi_nu over unit-volume symmetric polytopes with the normals of
// nu by gradient descent in log h with Armijo steps; the gradient in log h
// is nu_i minus the cone mass of facet i.
LogMinkowskiResult log_minkowski_solve(const SphericalMeasure& nu, const LogMinkowskiOptions& options = {});

struct KFunctionalResult {
    double upper = kInf;  // min over bodies of Phi_nu(C / |C|^{1/(n+1)})
    double lower = kInf;  // min over eta of F_nu(eta) - log|B|/(n+1)
    int best_body = -1, best_eta = -1;
    double tolerance = 0.0;  // 1e-9 plus the grid volume error of the bodies
    bool consistent = true;  // upper >= lower - tolerance
    bool unbounded = false;  // subspace concentration fails, K = -inf
    std::vector<double> descent;  // Phi along the collapsing linear images
};
// The eta side uses eta_C for every body plus the extra densities. T_alpha
// on the eta side puts the eta atoms at the grid nodes.
KFunctionalResult k_functional(const SphericalMeasure& nu, const std::vector<ConvexBody>& bodies, const SphereGrid& grid,
                               const std::vector<std::vector<double>>& extra_eta_densities = {});

// Density of eta_C = |B| rho_C^{n+1} sigma at the nodes (unnormalized).
std::vector<double> eta_density(const ConvexBody& C, const SphereGrid& g);
// (int rho_C^{n+1} dsigma)(int h_C^{-(n+1)} dsigma) by grid quadrature.
double polar_volume_product(const ConvexBody& C, const SphereGrid& g);
// T_alpha between atom sets; +inf when no finite coupling exists.
double transport_alpha(const SphericalMeasure& a, const SphericalMeasure& b, double margin = 0.0);

// (n+1) T_alpha(nu_C1, nu_C2) <= H(nu_1|sigma) + H(nu_2|sigma) for symmetric
// densities carried by the grid. Nodes within angle 1e-6 of orthogonality
// get +inf cost.
Ledger kolesnikov_check(const SphereGrid& g, const SphericalMeasure& nu1, const SphericalMeasure& nu2);

struct IdentityTerms {
    double transport = 0.0;  // (n+1) T_alpha(nu_C1, nu_C2)
    double h_term = 0.0;     // int log h_C1^{n+1} dnu_C1
    double rho_term = 0.0;   // int log rho_C1^{n+1} dnu_C2
    double value() const { return transport + h_term - rho_term; }
};
// C1 = C / |C|^{1/(n+1)}, C2 = C° / |C°|^{1/(n+1)}.
IdentityTerms mahler_identity(const ConvexBody& C);

// H(eta_1|sigma) + H(eta_2|sigma) + (n+1) T_alpha(nu_1, nu_2) <=
//   e_{n+1} + sum_i (n+1)/2 int log(1 + |grad V_i|^2/(n+1)^2) e^{-V_i} dsigma
// for unconditional unit-volume polytopes; grad V is analytic on the facet
// cones and nodes on cone boundaries are dropped.
Ledger lsi_unconditional_check(const ConvexBody& C1, const ConvexBody& C2, const SphereGrid& g, double tol = 5e-3);
// |C||C°| >= 4^{n+1}/(n+1)! exp(mahler_identity(C).value())
Ledger improved_mahler_check(const ConvexBody& C, double tol = 1e-6);

// sigma(A) sigma(B) <= cos^{n+1}(d(A, B)) on node sets (masks).
Ledger concentration_ab_check(const SphereGrid& g, const std::vector<bool>& A, const std::vector<bool>& B);
// sigma(S^n \ A_r) <= 2 cos^{n+1}(r) for symmetric A with sigma(A) >= 1/2.
Ledger concentration_enlargement_check(const SphereGrid& g, const std::vector<bool>& A, double r);
// Nodes within geodesic distance `radius` of +-center.
std::vector<bool> symmetric_cap(const SphereGrid& g, const Vec& center, double radius);

// 2(n+1) Var_sigma(f) <= int |grad f|^2 dsigma for even f. Without `grad`
// (Euclidean gradient) the tangential gradient comes from central
// differences along geodesics.
Ledger sphere_poincare_check(const SphereGrid& g, const std::function<double(const Vec&)>& f,
                             const std::function<Vec(const Vec&)>& grad = nullptr, double tol = 1e-3);

// Cap measure nu = 1_A sigma / sigma(A) against sigma.
struct NonsymResult {
    bool infeasible = false;
    double transport = kInf;
    double entropy = 0.0;    // H(nu | sigma) = -log sigma(A)
    double cap_mass = 0.0;   // sigma(A)
    double enlarged = 0.0;   // sigma(A_{pi/2})
};
NonsymResult nonsym_cap_check(const SphereGrid& g, const Vec& center, double radius);

}  // namespace santalo::sphere

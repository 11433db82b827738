#pragma once

#include "santalo/common.hpp"
#include "santalo/ledger.hpp"
#include "santalo/measures.hpp"
#include "santalo/sconcave.hpp"

#include <iosfwd>
#include <vector>

namespace santalo::linearize {

using measures::WeightFunction;
using sconcave::GridFunction;

// 1/2 H = -(rho'/rho)(s) I + ((rho'/rho)^2 - rho''/rho)(s) y y^T with s = |y|^2.
// Eigenvalues are 2 v'(t)/e^t across y and 2 v''(t)/e^t along y, t = log s.
struct HRhoMatrix {
    Vec y;
    Mat H;
};
// y = 0 gives the limit -2 (rho'/rho)(0) I. Throws NotStrictlyConvex when an
// eigenvalue is not positive.
HRhoMatrix h_rho_matrix(const WeightFunction& w, const Vec& y);

struct TaylorReport {
    std::vector<double> radii;
    // max |omega(y+h,y) - Hh.h/2| / |h|^2 over the directions, less a rounding
    // bound on omega, so an exactly quadratic cost gives 0
    std::vector<double> residual;
    double order = 0.0;     // least-squares slope over the positive residuals; 0 with fewer than two
    bool monotone = false;  // non-increasing as the radius shrinks, strictly while positive
};
// Directions: +-1 in 1D, 64 angles in 2D, +-e_i and +-(e_i +- e_j)/sqrt2 above.
TaylorReport taylor_check(const WeightFunction& w, const Vec& y, const std::vector<double>& radii);

// R F(y) = min over grid nodes x of F(x) + omega(x, y) with F = eps f; the
// restricted cost is +inf where x.y < 0. Every node is scanned.
GridFunction hopf_lax(const GridFunction& f, double eps, const WeightFunction& w);

// Centered differences inside the grid, one-sided on the boundary.
std::vector<Vec> grid_gradient(const GridFunction& f);

// int f^2 dmu <= 1/2 int H^{-1} grad f . grad f dmu on the cell masses of mu_rho
// after symmetrizing f and removing its discrete mean. The grid must be
// symmetric about 0. Barenblatt weights are excluded (Skipped).
Ledger weighted_poincare_check(const GridFunction& f, const WeightFunction& w, double tol = 5e-3);

// Talagrand gap on the pair (1 +- eps f) mu_rho against eps^2.
struct ChainRow {
    double eps = 0.0;
    double lhs = 0.0, rhs = 0.0, gap = 0.0;
    double normalized_gap = 0.0;  // gap / eps^2
    double tol = 0.0;             // discretization slack of the Talagrand ledger
    Verdict verdict = Verdict::Skipped;
};
std::vector<ChainRow> linearization_chain(const GridFunction& f, const WeightFunction& w,
                                          const std::vector<double>& epsilons);
void write_chain_csv(std::ostream& os, const std::vector<ChainRow>& rows);

}  // namespace santalo::linearize

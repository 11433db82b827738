#pragma once

#include "santalo/common.hpp"
#include "santalo/ledger.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace santalo::sconcave {

// Rectangular grid in dimension 1 or 2. Nodes include both endpoints of
// every axis; node index is row-major with the last axis fastest.
struct GridSpec {
    int dim = 1;
    std::vector<double> lo, hi;
    std::vector<int> n;

    static GridSpec line(double a, double b, int nodes);
    static GridSpec square(double a, double b, int nodes);

    std::size_t size() const;
    double spacing(int axis) const { return (hi[axis] - lo[axis]) / (n[axis] - 1); }
    double mesh() const;
    Vec node(std::size_t index) const;
    std::vector<int> multi_index(std::size_t index) const;
    std::size_t flat_index(const std::vector<int>& idx) const;
    void validate() const;
    bool operator==(const GridSpec& o) const { return dim == o.dim && lo == o.lo && hi == o.hi && n == o.n; }
};

struct GridFunction {
    GridSpec grid;
    std::vector<double> values;

    static GridFunction sample(const GridSpec& grid, const std::function<double(const Vec&)>& f);

    int dim() const { return grid.dim; }
    double mesh() const { return grid.mesh(); }
    Vec node(std::size_t i) const { return grid.node(i); }
    double max_value() const;
    void validate() const;  // finite, nonnegative, not identically zero
};

// Nodes carry midpoint-rule cell weights; a positive node next to a zero
// node covers half of its cell along that axis.
enum class Tail { None, PowerLaw };
std::vector<double> cell_weights(const GridFunction& f);
double integrate(const GridFunction& f, Tail tail = Tail::None);
Vec barycenter(const GridFunction& f);

void write_csv(std::ostream& os, const GridFunction& f);
GridFunction read_csv(std::istream& is);
void write_binary(std::ostream& os, const GridFunction& f);
GridFunction read_binary(std::istream& is);

enum class Regime { Positive, Zero, NegativeAdmissible };

struct SParam {
    double s = 0.0;
    bool is_zero() const { return std::fabs(s) < 1e-8; }
    // throws InadmissibleS when s <= -1/n
    Regime regime(int n) const;
};

// (1 - s t)_+^{1/s}, with the s -> 0 limit e^{-t}
double s_power(double s, double t);

GridFunction ls_transform(const GridFunction& g, SParam s, const GridSpec& target);
double cs_constant(SParam s, int n);

// Grid on which L_s f is resolved: the bounding box of the s-scaled polar of
// Conv(supp f) for s > 0, and a box where L_0 f has decayed for s = 0.
GridSpec dual_grid(const GridFunction& f, SParam s, int nodes_per_axis = 0);

// S(z) = int L_s f(x) (1 - s<z,x>)^{-(n+1+1/s)} dx from a sampled dual.
struct SFunctional {
    double value = 0.0;
    Vec gradient;
    Mat hessian;
};
SFunctional s_functional(const GridFunction& dual, SParam s, const Vec& z);

struct SSantaloResult {
    Vec point;
    double value = 0.0;
    int iterations = 0;
    double gradient_norm = 0.0;
};
SSantaloResult s_santalo_point(const GridFunction& f, SParam s, double tol = 1e-8,
                               const std::optional<GridSpec>& dual = std::nullopt);

Ledger bs_functional_check(const GridFunction& f, SParam s, const std::optional<GridSpec>& dual = std::nullopt);

GridFunction m_transform(const GridFunction& f, const std::optional<GridSpec>& target = std::nullopt);

bool is_unconditional(const GridFunction& g, double tol = 1e-12);
double hanner_bound(SParam s, int n);  // 4^n / ((1+s)...(1+ns))

struct PsResult {
    double value = 0.0;
    double integral = 0.0;
    double dual_integral = 0.0;
    Ledger ledger;
};
PsResult ps_functional(const GridFunction& g, SParam s, const std::optional<GridSpec>& target = std::nullopt);
// s < 0 only: m^n int f^{-m} int (M f)^{-m} with f = g^s, m = -1/s.
PsResult ps_functional_m_form(const GridFunction& g, SParam s);

// int f^{-(m+n)} against ((m+n)/2) int_{C(f)} |s|^{m-1}
Ledger weighted_moment_identity(const GridFunction& f, double m);

// Discrete class checks.
bool is_convex(const GridFunction& f, double tol = 1e-9);
bool in_class_f(const GridFunction& f, double tol = 1e-9);        // t -> f(tx)/t non-increasing
bool in_class_cs(const GridFunction& g, SParam s, double tol = 1e-9);  // t -> t^{-1/s} g(tx) non-decreasing

}  // namespace santalo::sconcave

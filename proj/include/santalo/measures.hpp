#pragma once

#include "santalo/common.hpp"
#include "santalo/sconcave.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace santalo::measures {

using sconcave::GridSpec;

enum class WeightKind { Gaussian, Barenblatt, Cauchy, Custom };

// Radial weight rho on [0, inf). mu_rho has density proportional to rho(|x|^2).
//   Gaussian   rho(t) = e^{-t/2}
//   Barenblatt rho(t) = (1 - s t)_+^{1/(2s)}
//   Cauchy     rho(t) = (1 + t)^{-beta}
//   Custom     log rho tabulated against log t, monotone cubic in between;
//              flat below the table, linear in (log t, log rho) above it.
class WeightFunction {
public:
    static WeightFunction gaussian();
    static WeightFunction barenblatt(double s);
    static WeightFunction cauchy(double beta);
    static WeightFunction custom(std::vector<double> t, std::vector<double> rho);
    // Samples rho on a log-spaced t grid.
    template <class F>
    static WeightFunction tabulate(F&& rho, double t_min = 1e-6, double t_max = 1e6, int nodes = 400) {
        std::vector<double> t(nodes), r(nodes);
        for (int i = 0; i < nodes; ++i) {
            t[i] = t_min * std::pow(t_max / t_min, double(i) / (nodes - 1));
            r[i] = rho(t[i]);
        }
        return custom(std::move(t), std::move(r));
    }

    WeightKind kind() const { return kind_; }
    double param() const { return param_; }  // s for Barenblatt, beta for Cauchy
    std::string name() const;
    nlohmann::json to_json() const;
    static WeightFunction from_json(const nlohmann::json& j);

    double operator()(double t) const;
    double log_rho(double t) const;   // -inf outside the support
    double dlog_rho(double t) const;  // rho'/rho
    double d2_ratio(double t) const;  // rho''/rho
    // v(t) = -log rho(e^t)
    double v(double t) const { return -log_rho(std::exp(t)); }
    // Radius of supp rho(|x|^2); infinite except for Barenblatt.
    double support_radius() const;
    // Closed-form normalization int rho(|x|^2) dx in R^n; quadrature for Custom.
    double normalization(int n) const;

private:
    WeightKind kind_ = WeightKind::Gaussian;
    double param_ = 0.0;
    struct Table;
    std::shared_ptr<const Table> table_;  // Custom only
};

struct AdmissibilityReport {
    bool admissible = false;
    bool monotone = false;
    bool convex = false;
    bool strictly_convex = false;
    bool integrable = false;
    std::vector<std::string> failures;
};
// Monotonicity of rho and convexity of v on a 1000-point log grid, plus
// integrability of rho(|x|^2) on R^n.
AdmissibilityReport check_admissible(const WeightFunction& w, int n = 1);

// Histogram on the cells [x_i - h/2, x_i + h/2] of a GridSpec.
struct GridMeasure {
    GridSpec grid;
    std::vector<double> p;
    std::optional<std::vector<double>> reference;

    static GridMeasure from_density(const GridSpec& grid, const std::function<double(const Vec&)>& density);
    std::size_t size() const { return p.size(); }
    void validate() const;
    double cell_volume() const;
    Vec mean() const;
};

struct MuRho {
    GridMeasure measure;
    double Z = 0.0;         // int rho(|x|^2) dx over R^n
    double captured = 0.0;  // fraction of mu_rho inside the grid cells
};
MuRho mu_rho(const WeightFunction& w, const GridSpec& grid);

// Unnormalized cell integrals of f with 5-point Gauss-Legendre per axis;
// cells listed in `fine` are split 32 ways per axis first.
std::vector<double> cell_integrals(const GridSpec& grid, const std::function<double(const Vec&)>& f,
                                   const std::function<bool(const Vec&, double)>& fine = nullptr);

struct DiscreteMeasure {
    std::vector<Vec> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
    int dim() const { return points.empty() ? 0 : int(points.front().size()); }
    void validate() const;
    bool is_symmetric(double point_tol = 1e-9, double weight_tol = 1e-12) const;
    Vec mean() const;
};
DiscreteMeasure to_discrete(const GridMeasure& m);

// Average of m and its reflection x -> -x. The grid must be symmetric about 0.
GridMeasure symmetrize(const GridMeasure& m);
DiscreteMeasure symmetrize(const DiscreteMeasure& m, double point_tol = 1e-9);
bool is_symmetric(const GridMeasure& m, double tol = 1e-12);

// sum p log(p/q), 0 log 0 = 0, +inf when p > 0 = q.
double relative_entropy(const std::vector<double>& p, const std::vector<double>& q);
double relative_entropy(const GridMeasure& p, const GridMeasure& q);
double relative_entropy(const GridMeasure& p);  // against p.reference
double relative_entropy(const DiscreteMeasure& p, const DiscreteMeasure& q, double point_tol = 1e-9);
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

enum class Gnomonic { ToSphere, ToPlane };
// T(x) = (x, 1)/sqrt(1 + |x|^2) and its inverse u -> (u_1..u_n)/u_{n+1}.
Vec gnomonic(const Vec& x);
Vec gnomonic_inverse(const Vec& u);
DiscreteMeasure gnomonic_push(const DiscreteMeasure& m, Gnomonic direction);

// CSV rows: coordinates then mass (and reference mass when present). The
// sidecar records the grid, the weight function and Z.
void write_csv(std::ostream& os, const GridMeasure& m);
void write_csv(std::ostream& os, const DiscreteMeasure& m);
DiscreteMeasure read_discrete_csv(std::istream& is);
nlohmann::json sidecar(const GridMeasure& m, const std::optional<WeightFunction>& w = std::nullopt,
                       std::optional<double> Z = std::nullopt);
void write_measure(const std::string& stem, const GridMeasure& m, const std::optional<WeightFunction>& w = std::nullopt,
                   std::optional<double> Z = std::nullopt);

nlohmann::json grid_to_json(const GridSpec& g);
GridSpec grid_from_json(const nlohmann::json& j);

}  // namespace santalo::measures

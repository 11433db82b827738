#pragma once

#include "santalo/geometry.hpp"
#include "santalo/ledger.hpp"

namespace santalo {

struct SantaloResult {
    Vec point;
    double polar_volume = 0.0;
    int iterations = 0;
    double gradient_norm = 0.0;
};

// Value, gradient and Hessian of z -> |(K - z)°|.
struct PolarVolumeDerivatives {
    double value = 0.0;
    Vec gradient;
    Mat hessian;
};

// Precomputed data for repeated evaluation of z -> |(K - z)°|.
class SantaloFunctional {
public:
    explicit SantaloFunctional(const geometry::ConvexBody& body);

    double value(const Vec& z) const { return derivatives(z, false).value; }
    PolarVolumeDerivatives derivatives(const Vec& z, bool with_hessian = true) const;
    // bar((K - z)°)
    Vec polar_barycenter(const Vec& z) const;
    // Distance-like margin of z inside K; positive iff z is interior.
    double interior_margin(const Vec& z) const;
    double diameter() const { return diameter_; }
    int dim() const { return dim_; }

private:
    geometry::ConvexBody body_;
    int dim_;
    double diameter_ = 0.0;
    std::vector<Vec> polar_vertices_;
    std::vector<std::vector<int>> polar_simplices_;
    std::vector<Vec> directions_;  // smooth bodies: spherical quadrature
    std::vector<double> weights_;
    std::vector<double> supports_;
};

double santalo_functional(const geometry::ConvexBody& K, const Vec& z);
SantaloResult santalo_point(const geometry::ConvexBody& K, double tol = 1e-8, int max_iter = 100);

enum class VolumeProductMode { AtSantalo, AtOrigin };
double volume_product(const geometry::ConvexBody& K, VolumeProductMode mode);

// Direct inequality with the barycentric correction factor.
Ledger bs_check(const geometry::ConvexBody& K);
// Sign of <San(K°), bar(K)>, which is nonpositive for convex K.
Ledger santalo_sign_check(const geometry::ConvexBody& K);

}  // namespace santalo

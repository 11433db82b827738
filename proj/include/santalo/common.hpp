#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace santalo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = std::numbers::pi;

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

#define SANTALO_ERROR(Name)                                                   \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what = "") : Error(#Name, what) {}   \
    }

SANTALO_ERROR(OriginNotInterior);
SANTALO_ERROR(DegenerateBody);
SANTALO_ERROR(PointOutside);
SANTALO_ERROR(DivergentIntegral);
SANTALO_ERROR(EmptySupport);
SANTALO_ERROR(InadmissibleS);
SANTALO_ERROR(UnboundedDual);
SANTALO_ERROR(NonPositive);
SANTALO_ERROR(NotUnconditional);
SANTALO_ERROR(NotInClass);
SANTALO_ERROR(NotAdmissible);
SANTALO_ERROR(GridMismatch);
SANTALO_ERROR(EquatorPoint);
SANTALO_ERROR(OutsideBall);
SANTALO_ERROR(NotUnit);
SANTALO_ERROR(DegenerateInput);
SANTALO_ERROR(NotSymmetric);
SANTALO_ERROR(NotUnitVolume);
SANTALO_ERROR(NotConcentrated);
SANTALO_ERROR(NotStrictlyConvex);
SANTALO_ERROR(NotEven);
SANTALO_ERROR(EmptySet);
SANTALO_ERROR(ConfigInvalid);
SANTALO_ERROR(UnknownSuite);
SANTALO_ERROR(InvalidArgument);
SANTALO_ERROR(Infeasible);

#undef SANTALO_ERROR

// Iteration budget exhausted; the best iterate is kept for inspection.
class MaxIterations : public Error {
public:
    MaxIterations(int iterations, Vec best, const std::string& what = "")
        : Error("MaxIterations", what + " after " + std::to_string(iterations) + " iterations"),
          iterations_(iterations), best_(std::move(best)) {}
    int iterations() const { return iterations_; }
    const Vec& best() const { return best_; }

private:
    int iterations_;
    Vec best_;
};

class NotConverged : public Error {
public:
    NotConverged(double residual, const std::string& what = "")
        : Error("NotConverged", what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// Volume of the Euclidean unit ball in R^n.
inline double unit_ball_volume(int n) {
    return std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

inline double factorial(int n) {
    double r = 1.0;
    for (int k = 2; k <= n; ++k) r *= k;
    return r;
}

}  // namespace santalo

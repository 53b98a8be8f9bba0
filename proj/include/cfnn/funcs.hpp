#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cfnn/common.hpp"

namespace cfnn {

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

// Jacobi elliptic sn via the descending Landen / AGM ladder.
// m in [0, 1]; the degenerate moduli reduce to sin and tanh.
double jacobi_sn(double u, double m);

// sn and cn from the same ladder, for the sn^2 + cn^2 identity check.
struct JacobiSnCn {
    double sn;
    double cn;
};
JacobiSnCn jacobi_sn_cn(double u, double m);

// Incomplete elliptic integrals of the first and second kind, phi in
// [0, 2*pi] (quarter-period reduction), m in [0, 1). Adaptive
// Gauss-Legendre quadrature of the defining integrals.
double ellip_F(double phi, double m);
double ellip_E(double phi, double m);

// Modified Bessel function of the first kind, nu in [0, 5], y in [0, 5].
// Power series with a Lanczos gamma.
double bessel_I(double nu, double y);

double lanczos_gamma(double x);

// Fixed-panel Gauss-Legendre nodes/weights on [-1, 1] (cached per order).
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussLegendreRule& gauss_legendre(int order);

// Adaptive quadrature: per-panel comparison of two orders, bisect on
// disagreement. Throws ConvergenceFailure if refinement stalls.
double adaptive_quadrature(const std::function<double(double)>& f, double a,
                           double b, double abs_tol);

// ---------------------------------------------------------------------------
// Ground-truth target functions for data generation
// ---------------------------------------------------------------------------

enum class TargetId : uint8_t {
    BilinearRatio,
    Runge,
    RationalInteraction,
    NestedRational,
    ExpSin3Pi,
    HighfreqGauss,
    ExpSum3,
    Ratio3,
    JacobiSn,
    EllipF,
    EllipE,
    BesselI,
};

struct TargetFunction {
    TargetId id;
    std::string name;
    int arity;
    std::vector<std::pair<double, double>> domain;
    double epsilon_sing;  // guard for rational denominators
    // Sampler contract: inputs failing this predicate are rejected.
    std::function<bool(std::span<const double>)> admissible;
    std::function<double(std::span<const double>)> eval;
};

const TargetFunction& get_target(TargetId id);
const TargetFunction& get_target(std::string_view name);
const std::vector<TargetFunction>& all_targets();

// Evaluates with domain checking; DomainError outside declared intervals.
double eval_target(TargetId id, std::span<const double> x);

}  // namespace cfnn

#include "cfnn/funcs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace cfnn {

// ---------------------------------------------------------------------------
// Jacobi sn
// ---------------------------------------------------------------------------

JacobiSnCn jacobi_sn_cn(double u, double m) {
    if (m < 0.0 || m > 1.0) throw DomainError("jacobi_sn: m outside [0, 1]");
    if (m == 0.0) return {std::sin(u), std::cos(u)};
    if (m == 1.0) return {std::tanh(u), 1.0 / std::cosh(u)};

    // AGM ladder
    double a = 1.0, b = std::sqrt(1.0 - m);
    std::vector<double> as, cs;
    as.push_back(a);
    cs.push_back(std::sqrt(m));
    int n = 0;
    // stop at machine epsilon: a and b can stall one ulp apart, leaving the
    // c-sequence pinned just above any tighter threshold
    while (std::fabs(cs.back()) >
           std::numeric_limits<double>::epsilon() * as.back()) {
        if (++n > 64) throw ConvergenceFailure("jacobi_sn: AGM failed to contract");
        double an = 0.5 * (a + b);
        double cn = 0.5 * (a - b);
        b = std::sqrt(a * b);
        a = an;
        as.push_back(a);
        cs.push_back(cn);
    }

    double phi = std::ldexp(1.0, n) * a * u;
    for (int i = n; i >= 1; --i) {
        double s = std::clamp(cs[static_cast<size_t>(i)] / as[static_cast<size_t>(i)] *
                                  std::sin(phi),
                              -1.0, 1.0);
        phi = 0.5 * (phi + std::asin(s));
    }
    return {std::sin(phi), std::cos(phi)};
}

double jacobi_sn(double u, double m) { return jacobi_sn_cn(u, m).sn; }

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature
// ---------------------------------------------------------------------------

const GaussLegendreRule& gauss_legendre(int order) {
    static std::map<int, GaussLegendreRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    GaussLegendreRule rule;
    rule.nodes.resize(static_cast<size_t>(order));
    rule.weights.resize(static_cast<size_t>(order));
    // Newton iteration on Legendre polynomials from the Chebyshev guess.
    for (int i = 0; i < order; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = order * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        rule.nodes[static_cast<size_t>(i)] = x;
        rule.weights[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return cache.emplace(order, std::move(rule)).first->second;
}

static double gl_panel(const std::function<double(double)>& f, double a, double b,
                       int order) {
    const GaussLegendreRule& rule = gauss_legendre(order);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

static double adaptive_rec(const std::function<double(double)>& f, double a,
                           double b, double tol, int depth) {
    if (depth > 40) throw ConvergenceFailure("adaptive quadrature refinement stalled");
    double coarse = gl_panel(f, a, b, 12);
    double fine = gl_panel(f, a, b, 24);
    if (std::fabs(fine - coarse) <= tol) return fine;
    double mid = 0.5 * (a + b);
    return adaptive_rec(f, a, mid, 0.5 * tol, depth + 1) +
           adaptive_rec(f, mid, b, 0.5 * tol, depth + 1);
}

double adaptive_quadrature(const std::function<double(double)>& f, double a,
                           double b, double abs_tol) {
    if (a == b) return 0.0;
    return adaptive_rec(f, a, b, abs_tol, 0);
}

// ---------------------------------------------------------------------------
// Incomplete elliptic integrals
// ---------------------------------------------------------------------------

static double ellip_base(double phi, double m, bool first_kind) {
    auto integrand = [m, first_kind](double t) {
        double s = std::sin(t);
        double r = 1.0 - m * s * s;
        return first_kind ? 1.0 / std::sqrt(r) : std::sqrt(r);
    };
    return adaptive_quadrature(integrand, 0.0, phi, 1e-12);
}

// phi in [0, 2*pi] reduced to [0, pi/2] by periodicity and symmetry.
static double ellip_reduced(double phi, double m, bool first_kind) {
    if (m < 0.0 || m >= 1.0) throw DomainError("elliptic integral: m outside [0, 1)");
    if (phi < 0.0 || phi > 2.0 * M_PI + 1e-12)
        throw DomainError("elliptic integral: phi outside [0, 2*pi]");
    double complete = ellip_base(0.5 * M_PI, m, first_kind);
    double n = std::floor(phi / M_PI);
    double r = phi - n * M_PI;
    if (r <= 0.5 * M_PI) return 2.0 * n * complete + ellip_base(r, m, first_kind);
    return 2.0 * (n + 1.0) * complete - ellip_base(M_PI - r, m, first_kind);
}

double ellip_F(double phi, double m) { return ellip_reduced(phi, m, true); }
double ellip_E(double phi, double m) { return ellip_reduced(phi, m, false); }

// ---------------------------------------------------------------------------
// Modified Bessel I
// ---------------------------------------------------------------------------

double lanczos_gamma(double x) {
    // g = 7, n = 9 coefficients
    static const double coef[9] = {
        0.99999999999980993,  676.5203681218851,    -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,  12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x < 0.5)
        return M_PI / (std::sin(M_PI * x) * lanczos_gamma(1.0 - x));
    x -= 1.0;
    double a = coef[0];
    double t = x + 7.5;
    for (int i = 1; i < 9; ++i) a += coef[i] / (x + i);
    return std::sqrt(2.0 * M_PI) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

double bessel_I(double nu, double y) {
    if (nu < 0.0 || y < 0.0) throw DomainError("bessel_I: negative argument");
    if (y == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    double half = 0.5 * y;
    double term = std::pow(half, nu) / lanczos_gamma(nu + 1.0);
    double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= half * half / (k * (k + nu));
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Target function registry
// ---------------------------------------------------------------------------

static double guarded(double den, double eps) {
    double mag = std::max(std::fabs(den), eps);
    return den >= 0.0 ? mag : -mag;
}

static std::vector<TargetFunction> make_targets() {
    std::vector<TargetFunction> t;
    auto always = [](std::span<const double>) { return true; };

    t.push_back({TargetId::BilinearRatio, "bilinear_ratio", 3,
                 {{-2, 2}, {-2, 2}, {-2, 2}},
                 1e-3,
                 [](std::span<const double> x) { return std::fabs(x[2]) >= 0.1; },
                 [](std::span<const double> x) { return x[0] * x[1] / (x[2] + 1e-3); }});

    t.push_back({TargetId::Runge, "runge", 1, {{-1, 1}}, 0.0, always,
                 [](std::span<const double> x) { return 1.0 / (1.0 + 25.0 * x[0] * x[0]); }});

    t.push_back({TargetId::RationalInteraction, "rational_interaction", 3,
                 {{-2, 2}, {-2, 2}, {-2, 2}}, 0.0, always,
                 [](std::span<const double> x) {
                     return (x[0] + x[1]) / (1.0 + x[2] * x[2]);
                 }});

    t.push_back({TargetId::NestedRational, "nested_rational", 3,
                 {{-2, 2}, {0.5, 2}, {0.5, 2}},
                 1e-6, always,
                 [](std::span<const double> x) {
                     double inner = guarded(x[2], 1e-6);
                     double mid = guarded(x[1] + 1.0 / inner, 1e-6);
                     return x[0] + 1.0 / mid;
                 }});

    t.push_back({TargetId::ExpSin3Pi, "exp_sin3pi", 1, {{-2, 2}}, 0.0, always,
                 [](std::span<const double> x) {
                     return std::exp(x[0]) * std::sin(3.0 * M_PI * x[0]);
                 }});

    t.push_back({TargetId::HighfreqGauss, "highfreq_gauss", 1, {{-2, 2}}, 0.0, always,
                 [](std::span<const double> x) {
                     return std::sin(10.0 * M_PI * x[0]) * std::exp(-x[0] * x[0] / 10.0);
                 }});

    t.push_back({TargetId::ExpSum3, "exp_sum3", 3, {{-1, 1}, {-1, 1}, {-1, 1}}, 0.0,
                 always, [](std::span<const double> x) {
                     return std::exp(x[0] + x[1] + x[2]);
                 }});

    t.push_back({TargetId::Ratio3, "ratio3", 3, {{-2, 2}, {-2, 2}, {0.5, 3}}, 0.0,
                 always,
                 [](std::span<const double> x) { return x[0] * x[1] / x[2]; }});

    t.push_back({TargetId::JacobiSn, "jacobi_sn", 2, {{-5, 5}, {0, 1}}, 0.0, always,
                 [](std::span<const double> x) { return jacobi_sn(x[0], x[1]); }});

    t.push_back({TargetId::EllipF, "ellip_F", 2, {{0, 2.0 * M_PI}, {0, 0.99}}, 0.0,
                 always,
                 [](std::span<const double> x) { return ellip_F(x[0], x[1]); }});

    t.push_back({TargetId::EllipE, "ellip_E", 2, {{0, 2.0 * M_PI}, {0, 0.99}}, 0.0,
                 always,
                 [](std::span<const double> x) { return ellip_E(x[0], x[1]); }});

    t.push_back({TargetId::BesselI, "bessel_I", 2, {{0, 5}, {0, 5}}, 0.0, always,
                 [](std::span<const double> x) { return bessel_I(x[0], x[1]); }});

    return t;
}

const std::vector<TargetFunction>& all_targets() {
    static const std::vector<TargetFunction> targets = make_targets();
    return targets;
}

const TargetFunction& get_target(TargetId id) {
    for (const auto& t : all_targets())
        if (t.id == id) return t;
    throw InvalidConfig("unknown target id");
}

const TargetFunction& get_target(std::string_view name) {
    for (const auto& t : all_targets())
        if (t.name == name) return t;
    throw InvalidConfig("unknown target name: " + std::string(name));
}

double eval_target(TargetId id, std::span<const double> x) {
    const TargetFunction& t = get_target(id);
    if (static_cast<int>(x.size()) != t.arity)
        throw DomainError(t.name + ": wrong arity");
    for (int j = 0; j < t.arity; ++j) {
        auto [lo, hi] = t.domain[static_cast<size_t>(j)];
        if (x[j] < lo - 1e-12 || x[j] > hi + 1e-12)
            throw DomainError(t.name + ": input outside declared interval at dim " +
                              std::to_string(j));
    }
    return t.eval(x);
}

}  // namespace cfnn

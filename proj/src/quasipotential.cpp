#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "levy/errors.hpp"
#include "levy/quadrature.hpp"
#include "levy/quasipotential.hpp"

namespace levy {

namespace {

constexpr double kPi = std::numbers::pi;

void check_in_square(double a, double x, double y) {
    if (!(a > 0.0)) throw DomainError("interval half-width must be positive");
    const double tol = 1e-12 * a;
    if (std::abs(x) > a + tol || std::abs(y) > a + tol) throw DomainError("point outside [-a, a]");
}

// Integral over [0, top] of [v (v + 2 lo)]^-rho [v + shift]^(2 rho - mu).
double case1_integral(const StableCase1Params& p, double lo, double top, bool forward) {
    if (top <= 0.0) return 0.0;
    const double rho = p.rho, mu = p.mu;
    const double shift = forward ? 0.0 : 2.0 * lo;
    auto f = [&](double v) {
        if (v <= 0.0) return 0.0;
        return std::pow(v, -rho) * std::pow(v + 2.0 * lo, -rho) * std::pow(v + shift, 2.0 * rho - mu);
    };
    if (lo == 0.0) return quad::endpoint_singular(f, 0.0, top, 1e-13);
    double s = 0.0;
    double a = 0.0, b = std::min(top, lo);
    s += quad::endpoint_singular(f, a, b, 1e-13);
    // Geometric pieces beyond the inner scale.
    while (b < top) {
        a = b;
        b = std::min(top, 4.0 * b);
        s += quad::endpoint_singular(f, a, b, 1e-13);
    }
    return s;
}

}  // namespace

std::string to_string(QPKind k) {
    switch (k) {
        case QPKind::StableCase1: return "stable_case1";
        case QPKind::StableOneSided: return "stable_onesided";
        case QPKind::Cauchy: return "cauchy";
        case QPKind::WienerGreen: return "wiener_green";
        case QPKind::GridBacked: return "grid_backed";
    }
    return "grid_backed";
}

std::string to_string(DiagonalSingularity d) {
    switch (d) {
        case DiagonalSingularity::None: return "none";
        case DiagonalSingularity::Log: return "log";
        case DiagonalSingularity::Power: return "integrable_power";
    }
    return "none";
}

StableCase1Params stable_case1_params(double alpha, double beta) {
    if (!(alpha > 0.0 && alpha < 2.0) || alpha == 1.0)
        throw UnsupportedError("stable case-1 kernel needs alpha in (0,2), alpha != 1");
    if (!(beta > -1.0 && beta < 1.0)) throw UnsupportedError("stable case-1 kernel needs |beta| < 1");
    StableCase1Params p;
    p.alpha = alpha;
    p.beta = beta;
    p.mu = 2.0 - alpha;
    const double mu = p.mu;
    const double ratio = (1.0 - beta) / (1.0 + beta);
    auto g = [&](double r) { return std::sin(kPi * r) - ratio * std::sin(kPi * (mu - r)); };
    double lo = std::max(0.0, mu - 1.0), hi = std::min(mu, 1.0);
    double glo = g(lo), ghi = g(hi);
    if (glo * ghi > 0.0) throw UnsupportedError("no bracketed root for rho");
    boost::uintmax_t iters = 200;
    auto [r0, r1] = boost::math::tools::bisect(g, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    p.rho = 0.5 * (r0 + r1);
    if (!(p.rho > lo && p.rho < hi)) throw UnsupportedError("rho root on the bracket boundary");
    const double rho = p.rho;
    p.C_alpha = std::sin(kPi * rho) /
                (std::sin(kPi * alpha / 2.0) * (1.0 - beta) * std::tgamma(1.0 - rho) * std::tgamma(1.0 + rho - mu));
    return p;
}

double stable_kernel_case1(double alpha, double beta, double a, double x, double y) {
    check_in_square(a, x, y);
    return stable_kernel_case1_with(stable_case1_params(alpha, beta), a, x, y);
}

double stable_kernel_case1_with(const StableCase1Params& p, double a, double x, double y) {
    x = std::clamp(x, -a, a);
    y = std::clamp(y, -a, a);
    const double d = x - y;
    const double lo = a * std::abs(d);
    const double top = d >= 0.0 ? (a - x) * (a + y) : (a + x) * (a - y);
    if (top <= 0.0) return 0.0;
    if (d == 0.0 && p.mu >= 1.0) return std::numeric_limits<double>::infinity();
    return p.C_alpha * std::pow(2.0 * a, p.mu - 1.0) * case1_integral(p, lo, top, d > 0.0);
}

double stable_kernel_onesided(double alpha, double beta, double a, double x, double y) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw UnsupportedError("one-sided stable kernel needs alpha in (1,2)");
    if (beta != 1.0 && beta != -1.0) throw UnsupportedError("one-sided stable kernel needs beta = +1 or -1");
    check_in_square(a, x, y);
    if (beta < 0.0) {
        x = -x;
        y = -y;
    }
    x = std::clamp(x, -a, a);
    y = std::clamp(y, -a, a);
    const double e = alpha - 1.0;
    const double K = std::cos(kPi * alpha / 2.0) / (std::pow(2.0 * a, e) * std::tgamma(alpha));
    const double first = std::pow(a - x, e) * std::pow(a + y, e);
    const double gap = std::max(0.0, y - x);
    const double second = gap > 0.0 ? std::pow(2.0 * a * gap, e) : 0.0;
    return std::abs(K) * std::max(0.0, first - second);
}

double cauchy_kernel(double a, double x, double y) {
    check_in_square(a, x, y);
    if (x == y) throw DomainError("Cauchy kernel is logarithmically singular on the diagonal");
    x = std::clamp(x, -a, a);
    y = std::clamp(y, -a, a);
    const double s = std::sqrt(std::max(0.0, (a * a - x * x) * (a * a - y * y)));
    // Numerator times denominator equals a^2 (x-y)^2, which avoids the cancelling difference.
    return 0.5 * std::log((a * a - x * y + s) / (a * std::abs(x - y)));
}

double wiener_green(double a, double b, double x, double t) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("interval ends must satisfy b, a > 0");
    const double tol = 1e-12 * (a + b);
    if (x < -b - tol || x > a + tol || t < -b - tol || t > a + tol) throw DomainError("point outside [-b, a]");
    x = std::clamp(x, -b, a);
    t = std::clamp(t, -b, a);
    const double L = a + b;
    return t <= x ? 2.0 * (t + b) * (a - x) / L : 2.0 * (x + b) * (a - t) / L;
}

SymmetricShift shift_to_symmetric(double b, double a) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("interval ends must satisfy b, a > 0");
    return {(a + b) / 2.0, (b - a) / 2.0};
}

double QuasiPotentialKernel::operator()(double x, double y) const {
    if (x <= lo || x >= hi || y <= lo || y >= hi) return 0.0;
    return eval_fn(x, y);
}

double QuasiPotentialKernel::integral_y(double x, double y0, double y1) const {
    y0 = std::max(y0, lo);
    y1 = std::min(y1, hi);
    if (y1 <= y0) return 0.0;
    auto f = [&](double y) { return y == x ? 0.0 : eval_fn(x, y); };
    std::vector<double> br;
    if (x > y0 && x < y1) br.push_back(x);
    return quad::split(f, y0, y1, br, 1e-11);
}

double QuasiPotentialKernel::row_integral(double x) const {
    if (row_integral_fn) return row_integral_fn(x);
    return integral_y(x, lo, hi);
}

nlohmann::json QuasiPotentialKernel::header() const {
    if (!imported_header.is_null()) return imported_header;
    nlohmann::json j = {{"kind", to_string(kind)},
                        {"domain", {lo, hi}},
                        {"diagonal_singularity", to_string(diagonal)},
                        {"scale_factor", scale_factor}};
    if (diagonal == DiagonalSingularity::Power) j["diagonal_exponent"] = diagonal_exponent;
    if (kind == QPKind::StableCase1)
        j["stable"] = {{"alpha", stable.alpha}, {"beta", stable.beta}, {"mu", stable.mu}, {"rho", stable.rho},
                       {"C_alpha", stable.C_alpha}};
    if (construction) j["conditioning"] = {{"rcond", construction->rcond}, {"ill_conditioned", construction->ill_conditioned}};
    if (!warning.empty()) j["warning"] = warning;
    return j;
}

QuasiPotentialKernel make_wiener_kernel(double b, double a, double A) {
    if (!(A > 0.0)) throw DomainError("Gaussian coefficient must be positive");
    QuasiPotentialKernel k;
    k.kind = QPKind::WienerGreen;
    k.lo = -b;
    k.hi = a;
    k.scale_factor = 1.0 / A;
    k.eval_fn = [a, b, A](double x, double y) { return wiener_green(a, b, x, y) / A; };
    k.row_integral_fn = [a, b, A](double x) { return (a - x) * (x + b) / A; };
    return k;
}

namespace {

// Wrap a symmetric-domain evaluator for [-b, a].
template <class F>
std::function<double(double, double)> shifted(F f, double delta) {
    return [f, delta](double x, double y) { return f(x + delta, y + delta); };
}

}  // namespace

QuasiPotentialKernel make_cauchy_kernel(double b, double a, double scale_factor) {
    auto [c, delta] = shift_to_symmetric(b, a);
    QuasiPotentialKernel k;
    k.kind = QPKind::Cauchy;
    k.lo = -b;
    k.hi = a;
    k.diagonal = DiagonalSingularity::Log;
    k.scale_factor = scale_factor;
    k.eval_fn = shifted(
        [c, scale_factor](double x, double y) {
            if (x == y) return std::numeric_limits<double>::infinity();
            return scale_factor * cauchy_kernel(c, x, y);
        },
        delta);
    k.row_integral_fn = [c, delta, scale_factor](double x) {
        double u = x + delta;
        return scale_factor * 0.5 * kPi * std::sqrt(std::max(0.0, c * c - u * u));
    };
    return k;
}

QuasiPotentialKernel make_stable_case1_kernel(double alpha, double beta, double b, double a, double scale_factor) {
    auto [c, delta] = shift_to_symmetric(b, a);
    QuasiPotentialKernel k;
    k.kind = QPKind::StableCase1;
    k.lo = -b;
    k.hi = a;
    k.stable = stable_case1_params(alpha, beta);
    k.scale_factor = scale_factor;
    if (alpha < 1.0) {
        k.diagonal = DiagonalSingularity::Power;
        k.diagonal_exponent = 1.0 - alpha;
    }
    auto p = k.stable;
    k.eval_fn = shifted([p, c, scale_factor](double x, double y) { return scale_factor * stable_kernel_case1_with(p, c, x, y); },
                        delta);
    if (beta == 0.0) {
        k.row_integral_fn = [c, delta, alpha, scale_factor](double x) {
            double u = x + delta;
            return scale_factor * std::pow(std::max(0.0, c * c - u * u), alpha / 2.0) / std::tgamma(1.0 + alpha);
        };
    }
    return k;
}

QuasiPotentialKernel make_onesided_kernel(double alpha, double beta, double b, double a, double scale_factor) {
    auto [c, delta] = shift_to_symmetric(b, a);
    stable_kernel_onesided(alpha, beta, 1.0, 0.0, 0.0);  // parameter check
    QuasiPotentialKernel k;
    k.kind = QPKind::StableOneSided;
    k.lo = -b;
    k.hi = a;
    k.scale_factor = scale_factor;
    k.stable.alpha = alpha;
    k.stable.beta = beta;
    k.eval_fn = shifted(
        [alpha, beta, c, scale_factor](double x, double y) {
            return scale_factor * stable_kernel_onesided(alpha, beta, c, x, y);
        },
        delta);
    return k;
}

QuasiPotentialKernel quasi_potential_for_model(const LevyModel& model, const Domain& domain, bool allow_general,
                                               const ConstructionOptions& opt) {
    domain.validate();
    if (!domain.is_single()) throw UnsupportedError("quasi-potential kernels are implemented for a single interval");
    const Interval iv = domain.intervals.front();
    if (!(iv.lo < 0.0 && iv.hi > 0.0)) throw DomainError("domain must contain the origin: [-b, a] with a, b > 0");
    const double b = -iv.lo, a = iv.hi;
    if (std::holds_alternative<Gaussian>(model.spec) && model.gamma == 0.0) return make_wiener_kernel(b, a, model.A);
    if (model.is_stable() && model.gamma == 0.0 && model.A == 0.0) {
        const Stable& s = model.stable();
        if (s.alpha == 1.0 && s.c1 == s.c2) return make_cauchy_kernel(b, a, (2.0 / kPi) / s.scale);
        if (s.alpha != 1.0 && std::abs(s.beta) < 1.0)
            return make_stable_case1_kernel(s.alpha, s.beta, b, a, 1.0 / s.scale);
        if (s.alpha > 1.0 && std::abs(s.beta) == 1.0) return make_onesided_kernel(s.alpha, s.beta, b, a, 1.0 / s.scale);
        if (!allow_general)
            throw UnsupportedError("no closed-form quasi-potential for stable alpha <= 1 with beta != 0 at alpha = 1 or |beta| = 1");
    }
    if (!allow_general) throw UnsupportedError("no closed-form quasi-potential for this model");
    auto [c, delta] = shift_to_symmetric(b, a);
    QuasiPotentialKernel g = general_construction(build_kernel(model), c, opt);
    if (delta == 0.0) return g;
    QuasiPotentialKernel k = g;
    k.lo = -b;
    k.hi = a;
    auto inner = g.eval_fn;
    k.eval_fn = shifted(inner, delta);
    k.row_integral_fn = nullptr;
    return k;
}

}  // namespace levy

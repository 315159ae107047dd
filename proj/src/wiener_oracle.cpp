#include "levy/wiener.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "levy/errors.hpp"

namespace levy::wiener {

namespace {

constexpr double kPi = std::numbers::pi;

void check(double a, double b, double t) {
    if (!(a > 0.0 && b > 0.0 && t > 0.0)) throw DomainError("wiener oracle needs a, b, t > 0");
}

}  // namespace

SeriesResult p2_series_ex(double a, double b, double t, double tol) {
    check(a, b, t);
    const double L = a + b;
    const double w = t * (kPi / L) * (kPi / L) / 2.0;
    const bool alternating = a == b;
    SeriesResult r;
    double sum = 0.0;
    constexpr int kMaxTerms = 2000000;
    for (int m = 0; m < kMaxTerms; ++m) {
        double k = 2.0 * m + 1.0;
        sum += 4.0 / (k * kPi) * std::sin(k * b * kPi / L) * std::exp(-w * k * k);
        double kn = k + 2.0;
        double next = 4.0 / (kn * kPi) * std::exp(-w * kn * kn);
        double bound = next;
        if (!alternating) {
            double ratio = std::exp(-w * 8.0 * (m + 2.0));
            bound = ratio < 1.0 ? next / (1.0 - ratio) : INFINITY;
        }
        r.terms = m + 1;
        r.remainder_bound = bound;
        if (bound < tol) break;
    }
    r.value = sum;
    r.best_effort = r.remainder_bound >= tol || tol < 4.0 * std::numeric_limits<double>::epsilon() * std::abs(sum);
    return r;
}

double p2_series(double a, double b, double t, double tol) { return p2_series_ex(a, b, t, tol).value; }

double p2_resummed(double a, double b, double t, double tol) {
    check(a, b, t);
    const double L = a + b;
    const double s = std::sqrt(2.0 * t);
    // sqrt(2/pi) * int_{c/sqrt t}^{d/sqrt t} exp(-u^2/2) du
    auto G = [&](double c, double d) { return std::erfc(c / s) - std::erfc(d / s); };
    double p = std::erf(a / s);
    int quiet = 0;
    for (int m = 1; m < 100000; ++m) {
        double A = 2.0 * m * L + a, B = 2.0 * m * L - a;
        double C = m * L + a, D = m * L - a;
        double t1 = 2.0 * G(B, A), t2 = G(D, C);
        p += t1 - t2;
        if (std::abs(t1) < tol / 10.0 && std::abs(t2) < tol / 10.0) {
            if (++quiet >= 2) break;
        } else {
            quiet = 0;
        }
    }
    return p;
}

double p2(double a, double b, double t) {
    check(a, b, t);
    if (t / ((a + b) * (a + b)) >= 0.2) return p2_series(a, b, t);
    return p2_resummed(a, b, t);
}

double first_hitting_survival(double a, double t) {
    if (!(a > 0.0 && t > 0.0)) throw DomainError("first hitting survival needs a, t > 0");
    return std::erf(a / std::sqrt(2.0 * t));
}

double p2_asymptotic(double a, double b, double t) {
    check(a, b, t);
    const double L = a + b;
    return 4.0 / kPi * std::sin(a * kPi / L) * std::exp(-t * kPi * kPi / (2.0 * L * L));
}

double eigen_mu(int n, double a, double b) {
    if (n < 1) throw DomainError("eigen index starts at 1");
    double k = n * kPi / (a + b);
    return 0.5 * k * k;
}

double eigenfunction(int n, double a, double b, double x) {
    const double L = a + b;
    return std::sqrt(2.0 / L) * std::sin(n * kPi * (x + b) / L);
}

}  // namespace levy::wiener

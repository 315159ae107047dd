#pragma once

#include <functional>
#include <vector>

namespace levy::quad {

using Fn = std::function<double(double)>;

struct Rule {
    std::vector<double> x;
    std::vector<double> w;
};

/// Gauss-Legendre rule on [-1, 1]. Cached; safe to call concurrently.
const Rule& gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
Rule gauss_legendre(int n, double a, double b);

/// Fixed-order Gauss-Legendre sum of f over [a, b].
double fixed(const Fn& f, double a, double b, int n = 16);

/// Adaptive Gauss-Kronrod on [a, b]; a or b may be infinite.
/// Throws NumericalError (with the partial value) when the error estimate
/// stays above `fail_tol` relative to the L1 norm.
double adaptive(const Fn& f, double a, double b, double tol = 1e-12,
                double* err = nullptr, double fail_tol = 1e-6);

/// Tanh-sinh on a finite [a, b]; tolerates integrable endpoint singularities.
double endpoint_singular(const Fn& f, double a, double b, double tol = 1e-12,
                         double* err = nullptr);

/// Integrate over [a, b] split at the given interior breakpoints, using
/// tanh-sinh on every piece.
double split(const Fn& f, double a, double b, std::vector<double> breaks,
             double tol = 1e-12, double* err = nullptr);

/// Integral over [a, inf) by exp-sinh; requires decay.
double half_infinite(const Fn& f, double a, double tol = 1e-12, double* err = nullptr);

}  // namespace levy::quad

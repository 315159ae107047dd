#pragma once

namespace levy::wiener {

/// Survival p2(t, -b, a) of standard Brownian motion (generator f''/2) in (-b, a).

struct SeriesResult {
    double value = 0.0;
    double remainder_bound = 0.0;
    int terms = 0;
    bool best_effort = false;  ///< tol below what double precision / the term cap can deliver
};

/// Eigenfunction series, summed until the remainder bound drops below tol.
SeriesResult p2_series_ex(double a, double b, double t, double tol = 1e-15);
double p2_series(double a, double b, double t, double tol = 1e-15);

/// Image (reflection) series in complementary error functions; accurate for small t.
double p2_resummed(double a, double b, double t, double tol = 1e-17);

/// Picks the series for t/(a+b)^2 >= 0.2 and the image series below.
double p2(double a, double b, double t);

/// P(T_a > t) for the first passage above level a.
double first_hitting_survival(double a, double t);

/// Leading term (4/pi) sin(a pi/(a+b)) exp(-t pi^2 / (2 (a+b)^2)).
double p2_asymptotic(double a, double b, double t);

/// mu_n = (n pi/(a+b))^2 / 2, the n-th decay rate of the killed semigroup.
double eigen_mu(int n, double a, double b);
/// Orthonormal eigenfunction sqrt(2/(a+b)) sin(n pi (x+b)/(a+b)).
double eigenfunction(int n, double a, double b, double x);

}  // namespace levy::wiener

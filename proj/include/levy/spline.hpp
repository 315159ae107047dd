#pragma once

#include <vector>

namespace levy {

/// Cubic interpolating spline on a strictly increasing grid.
class CubicSpline {
public:
    enum class End { NotAKnot, Clamped };

    CubicSpline() = default;
    /// Clamped ends use the given end slopes; not-a-knot ignores them.
    CubicSpline(std::vector<double> x, std::vector<double> y, End end = End::NotAKnot, double d0 = 0.0,
                double dn = 0.0);

    double operator()(double t) const;
    double derivative(double t) const;
    double second_derivative(double t) const;

    /// Index of the piece containing t (clamped to [0, n-2]).
    int piece(double t) const;
    /// Taylor coefficients of piece k about its left knot: value, d1, d2/2, d3/6.
    void coefficients(int k, double& c0, double& c1, double& c2, double& c3) const;

    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& second_derivatives() const { return m_; }
    double lo() const { return x_.front(); }
    double hi() const { return x_.back(); }

private:
    std::vector<double> x_, y_, m_;
};

}  // namespace levy

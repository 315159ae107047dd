#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace th {

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

inline std::vector<double> chebyshev_lobatto(double a, double b, int n) {
    std::vector<double> v(n);
    for (int j = 0; j < n; ++j) v[j] = 0.5 * (a + b) - 0.5 * (b - a) * std::cos(std::numbers::pi * j / (n - 1));
    v.front() = a;
    v.back() = b;
    return v;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace th

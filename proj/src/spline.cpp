#include "levy/spline.hpp"

#include <algorithm>
#include <stdexcept>

#include "levy/errors.hpp"

namespace levy {

namespace {

// Thomas algorithm; a = sub, b = diag, c = super.
std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                                      std::vector<double> d) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
    return x;
}

}  // namespace

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y, End end, double d0, double dn)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n != y_.size()) throw DomainError("spline grid and values differ in length");
    if (n < 4) throw DomainError("spline needs at least 4 nodes");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw DomainError("spline grid must be strictly increasing");
    std::vector<double> h(n - 1), dl(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        dl[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    m_.assign(n, 0.0);
    if (end == End::Clamped) {
        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
        b[0] = 2.0 * h[0];
        c[0] = h[0];
        d[0] = 6.0 * (dl[0] - d0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            a[i] = h[i - 1];
            b[i] = 2.0 * (h[i - 1] + h[i]);
            c[i] = h[i];
            d[i] = 6.0 * (dl[i] - dl[i - 1]);
        }
        a[n - 1] = h[n - 2];
        b[n - 1] = 2.0 * h[n - 2];
        d[n - 1] = 6.0 * (dn - dl[n - 2]);
        m_ = solve_tridiagonal(a, b, c, d);
        return;
    }
    // Not-a-knot: eliminate m_0 and m_{n-1} from the first and last interior equations.
    const std::size_t k = n - 2;
    std::vector<double> a(k, 0.0), b(k, 0.0), c(k, 0.0), d(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t i = j + 1;
        a[j] = h[i - 1];
        b[j] = 2.0 * (h[i - 1] + h[i]);
        c[j] = h[i];
        d[j] = 6.0 * (dl[i] - dl[i - 1]);
    }
    // m0 = ((h0+h1) m1 - h0 m2)/h1
    b[0] += h[0] * (h[0] + h[1]) / h[1];
    c[0] -= h[0] * h[0] / h[1];
    // m_{n-1} = ((h_{n-3}+h_{n-2}) m_{n-2} - h_{n-2} m_{n-3})/h_{n-3}
    double hl = h[n - 2], hp = h[n - 3];
    b[k - 1] += hl * (hp + hl) / hp;
    a[k - 1] -= hl * hl / hp;
    auto inner = solve_tridiagonal(a, b, c, d);
    for (std::size_t j = 0; j < k; ++j) m_[j + 1] = inner[j];
    m_[0] = ((h[0] + h[1]) * m_[1] - h[0] * m_[2]) / h[1];
    m_[n - 1] = ((hp + hl) * m_[n - 2] - hl * m_[n - 3]) / hp;
}

int CubicSpline::piece(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    int k = static_cast<int>(it - x_.begin()) - 1;
    return std::clamp(k, 0, static_cast<int>(x_.size()) - 2);
}

void CubicSpline::coefficients(int k, double& c0, double& c1, double& c2, double& c3) const {
    double h = x_[k + 1] - x_[k];
    c0 = y_[k];
    c1 = (y_[k + 1] - y_[k]) / h - h * (2.0 * m_[k] + m_[k + 1]) / 6.0;
    c2 = 0.5 * m_[k];
    c3 = (m_[k + 1] - m_[k]) / (6.0 * h);
}

double CubicSpline::operator()(double t) const {
    int k = piece(t);
    double c0, c1, c2, c3;
    coefficients(k, c0, c1, c2, c3);
    double u = t - x_[k];
    return c0 + u * (c1 + u * (c2 + u * c3));
}

double CubicSpline::derivative(double t) const {
    int k = piece(t);
    double c0, c1, c2, c3;
    coefficients(k, c0, c1, c2, c3);
    double u = t - x_[k];
    return c1 + u * (2.0 * c2 + 3.0 * u * c3);
}

double CubicSpline::second_derivative(double t) const {
    int k = piece(t);
    double c0, c1, c2, c3;
    coefficients(k, c0, c1, c2, c3);
    return 2.0 * c2 + 6.0 * c3 * (t - x_[k]);
}

}  // namespace levy

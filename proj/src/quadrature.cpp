#include "levy/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "levy/errors.hpp"

namespace levy::quad {

namespace {

Rule compute_gauss_legendre(int n) {
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
            double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return r;
}

// Integrators grow their abscissa tables lazily, so a nested call must not share the
// outer call's instance. One instance per nesting depth and thread.
template <class Q, class Make>
class DepthPool {
public:
    explicit DepthPool(Make make) : make_(make) {}
    Q& acquire() {
        if (depth_ == pool_.size()) pool_.push_back(make_());
        return *pool_[depth_++];
    }
    void release() { --depth_; }

private:
    Make make_;
    std::vector<std::unique_ptr<Q>> pool_;
    std::size_t depth_ = 0;
};

using TanhSinh = boost::math::quadrature::tanh_sinh<double>;
using ExpSinh = boost::math::quadrature::exp_sinh<double>;

auto& ts_pool() {
    auto make = [] { return std::make_unique<TanhSinh>(12); };
    thread_local DepthPool<TanhSinh, decltype(make)> pool(make);
    return pool;
}

auto& es_pool() {
    auto make = [] { return std::make_unique<ExpSinh>(9); };
    thread_local DepthPool<ExpSinh, decltype(make)> pool(make);
    return pool;
}

template <class Pool>
struct Lease {
    Pool& pool;
    decltype(pool.acquire())& q;
    explicit Lease(Pool& p) : pool(p), q(p.acquire()) {}
    ~Lease() { pool.release(); }
};

}  // namespace

const Rule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<Rule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) {
        if (n == 1) {
            slot = std::make_unique<Rule>(Rule{{0.0}, {2.0}});
        } else {
            slot = std::make_unique<Rule>(compute_gauss_legendre(n));
        }
    }
    return *slot;
}

Rule gauss_legendre(int n, double a, double b) {
    const Rule& ref = gauss_legendre(n);
    Rule r = ref;
    double h = 0.5 * (b - a), m = 0.5 * (a + b);
    for (int i = 0; i < n; ++i) {
        r.x[i] = m + h * ref.x[i];
        r.w[i] = h * ref.w[i];
    }
    return r;
}

double fixed(const Fn& f, double a, double b, int n) {
    const Rule& ref = gauss_legendre(n);
    double h = 0.5 * (b - a), m = 0.5 * (a + b), s = 0.0;
    for (int i = 0; i < n; ++i) s += ref.w[i] * f(m + h * ref.x[i]);
    return h * s;
}

double adaptive(const Fn& f, double a, double b, double tol, double* err, double fail_tol) {
    if (a == b) {
        if (err) *err = 0.0;
        return 0.0;
    }
    double e = 0.0, l1 = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 18, tol, &e, &l1);
    if (err) *err = e;
    if (!std::isfinite(v) || e > std::max(fail_tol * l1, 1e-300)) {
        throw NumericalError("adaptive quadrature did not converge", v, e);
    }
    return v;
}

double endpoint_singular(const Fn& f, double a, double b, double tol, double* err) {
    if (a == b) {
        if (err) *err = 0.0;
        return 0.0;
    }
    if (std::abs(b - a) <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b))) {
        // Too narrow for the abscissae to resolve; a midpoint sample is exact to rounding.
        if (err) *err = 0.0;
        return (b - a) * f(0.5 * (a + b));
    }
    double e = 0.0, l1 = 0.0;
    std::size_t levels = 0;
    // Two-argument form: abscissae that round onto an endpoint carry negligible weight and
    // are dropped instead of evaluating a possibly singular integrand there.
    auto g = [&](double x, double) { return (x <= a || x >= b) ? 0.0 : f(x); };
    Lease lease(ts_pool());
    double v = lease.q.integrate(g, a, b, tol, &e, &l1, &levels);
    if (err) *err = e;
    if (!std::isfinite(v)) throw NumericalError("tanh-sinh quadrature produced a non-finite value", v, e);
    return v;
}

double split(const Fn& f, double a, double b, std::vector<double> breaks, double tol, double* err) {
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0, etot = 0.0, lo = a;
    for (double c : breaks) {
        if (c <= lo || c >= b) continue;
        double e = 0.0;
        total += endpoint_singular(f, lo, c, tol, &e);
        etot += e;
        lo = c;
    }
    double e = 0.0;
    total += endpoint_singular(f, lo, b, tol, &e);
    etot += e;
    if (err) *err = etot;
    return total;
}

double half_infinite(const Fn& f, double a, double tol, double* err) {
    double e = 0.0, l1 = 0.0;
    auto g = [&](double u) { return f(a + u); };
    Lease lease(es_pool());
    double v = lease.q.integrate(g, tol, &e, &l1);
    if (err) *err = e;
    if (!std::isfinite(v)) throw NumericalError("exp-sinh quadrature produced a non-finite value", v, e);
    return v;
}

}  // namespace levy::quad

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

#include "levy/errors.hpp"
#include "levy/kernels.hpp"
#include "levy/quadrature.hpp"
#include "levy/spline.hpp"

namespace levy {

namespace {

constexpr double kEps = 1e-3;
constexpr double kInf = std::numeric_limits<double>::infinity();

using Nu = std::function<double(double)>;

double sgn(double y) { return y > 0 ? 1.0 : (y < 0 ? -1.0 : 0.0); }

// Geometric panels on [d, 1] (d < 1) for integrands whose scale is set by the distance to 0.
template <class F>
double geometric_to_one(const F& f, double d) {
    double s = 0.0, lo = d;
    while (lo < 1.0) {
        double hi = std::min(1.0, 2.0 * lo);
        s += quad::fixed(f, lo, hi, 16);
        lo = hi;
    }
    return s;
}

// int_d^inf nu(side*t) dt, d > 0.
double tail_mass(const Nu& nu, double side, double d) {
    auto f = [&](double t) { return nu(side * t); };
    double s = 0.0;
    double start = d;
    if (d < 1.0) {
        s += geometric_to_one(f, d);
        start = 1.0;
    }
    s += quad::half_infinite(f, start, 1e-14);
    return s;
}

// int_d^1 t nu(side*t) dt, 0 when d >= 1.
double near_first_moment(const Nu& nu, double side, double d) {
    if (d >= 1.0) return 0.0;
    auto f = [&](double t) { return t * nu(side * t); };
    return geometric_to_one(f, d);
}

// Compensated tail form: k0(y) = int_{|t|>|y|, same side} (|t|-|y|) nu'(t) dt.
double k0_tail(const Nu& nu, double y) {
    double side = sgn(y), a = std::abs(y);
    auto f = [&](double s) { return s * nu(side * (a + s)); };
    double total = quad::fixed(f, 0.0, a, 16);
    double lo = a;
    double stop = std::max(1.0, 2.0 * a);
    while (lo < stop) {
        double hi = std::min(stop, 2.0 * lo);
        total += quad::fixed(f, lo, hi, 16);
        lo = hi;
    }
    total += quad::half_infinite(f, stop, 1e-14);
    return total;
}

// Uncompensated form: k0(y) = -int_{same side} min(|t|, |y|) nu'(t) dt.
double k0_uncompensated(const Nu& nu, double y) {
    double side = sgn(y), a = std::abs(y);
    auto g = [&](double t) { return t * nu(side * t); };
    double inner = quad::endpoint_singular(g, 0.0, a, 1e-13);
    return -(inner + a * tail_mass(nu, side, a));
}

// Local cubic interpolation of a side-wise table in log|y|.
class LogTable {
public:
    LogTable(std::function<double(double)> exact, double ymin, double ymax, int per_decade, Singularity sing,
             double sigma, double log_coeff)
        : exact_(std::move(exact)), lmin_(std::log(ymin)), lmax_(std::log(ymax)), sing_(sing), sigma_(sigma),
          log_coeff_(log_coeff) {
        int n = static_cast<int>(std::ceil((lmax_ - lmin_) / std::log(10.0) * per_decade)) + 1;
        h_ = (lmax_ - lmin_) / (n - 1);
        for (double side : {1.0, -1.0}) {
            auto& v = side > 0 ? pos_ : neg_;
            v.resize(n);
            for (int j = 0; j < n; ++j) v[j] = exact_(side * std::exp(lmin_ + j * h_));
        }
    }

    double operator()(double y) const {
        double a = std::abs(y);
        double l = std::log(a);
        const auto& v = y > 0 ? pos_ : neg_;
        if (l > lmax_) return exact_(y);
        if (l < lmin_) {
            // Below the table the leading singular term takes over.
            if (sing_ == Singularity::Log) return v[0] - log_coeff_ * (l - lmin_);
            if (sing_ == Singularity::Power) return v[0] * std::exp(-sigma_ * (l - lmin_));
            return v[0];
        }
        int n = static_cast<int>(v.size());
        double u = (l - lmin_) / h_;
        int j = std::clamp(static_cast<int>(std::floor(u)) - 1, 0, n - 4);
        double t = u - j;
        // Lagrange on nodes j..j+3 at local coordinate t.
        double l0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
        double l1 = t * (t - 2) * (t - 3) / 2.0;
        double l2 = -t * (t - 1) * (t - 3) / 2.0;
        double l3 = t * (t - 1) * (t - 2) / 6.0;
        return l0 * v[j] + l1 * v[j + 1] + l2 * v[j + 2] + l3 * v[j + 3];
    }

private:
    std::function<double(double)> exact_;
    double lmin_, lmax_, h_ = 0.0;
    Singularity sing_;
    double sigma_, log_coeff_;
    std::vector<double> pos_, neg_;
};

ConvolutionKernel stable_kernel(const LevyModel& model) {
    const Stable& s = model.stable();
    ConvolutionKernel k;
    k.A_half = 0.5 * model.A;
    k.even = s.c1 == s.c2;
    const double a = s.alpha, c1 = s.c1, c2 = s.c2;
    if (a == 1.0) {
        k.k0 = [c1, c2](double y) { return -(y < 0 ? c1 : c2) * std::log(std::abs(y)); };
        k.k0_antiderivative = [c1, c2](double y) {
            if (y == 0.0) return 0.0;
            return -(y > 0 ? c2 : c1) * (y * std::log(std::abs(y)) - y);
        };
        k.singularity = Singularity::Log;
        k.log_coeff = 0.5 * (c1 + c2);
        k.gamma_shift = -(model.gamma + (c2 - c1) * std::numbers::egamma);
        k.origin = "stable alpha=1 logarithmic kernel";
        return k;
    }
    const double coef = 1.0 / (a * (a - 1.0));
    k.k0 = [a, c1, c2, coef](double y) {
        if (y == 0.0) return a > 1.0 ? kInf : 0.0;
        return coef * std::pow(std::abs(y), 1.0 - a) * (y < 0 ? c1 : c2);
    };
    k.k0_antiderivative = [a, c1, c2, coef](double y) {
        if (y == 0.0) return 0.0;
        return coef * (y > 0 ? c2 : -c1) * std::pow(std::abs(y), 2.0 - a) / (2.0 - a);
    };
    if (a > 1.0) {
        k.singularity = Singularity::Power;
        k.sigma = a - 1.0;
        k.monotone_tails = true;
    }
    k.gamma_shift = -model.gamma;
    k.origin = "stable power kernel";
    return k;
}

}  // namespace

std::string to_string(Singularity s) {
    switch (s) {
        case Singularity::None: return "none";
        case Singularity::Log: return "log";
        case Singularity::Power: return "power";
    }
    return "none";
}

double ConvolutionKernel::operator()(double y) const {
    double v = k0 ? k0(y) : 0.0;
    return v + 0.5 * gamma_shift * sgn(y);
}

double ConvolutionKernel::integral(double lo, double hi) const {
    if (lo == hi) return 0.0;
    double drift = 0.5 * gamma_shift * (std::abs(hi) - std::abs(lo));
    if (!k0) return drift;
    if (k0_antiderivative) return k0_antiderivative(hi) - k0_antiderivative(lo) + drift;
    double sign = 1.0;
    if (lo > hi) {
        std::swap(lo, hi);
        sign = -1.0;
    }
    double v = quad::split([this](double u) { return k0(u); }, lo, hi, {0.0}, 1e-12);
    return sign * v + drift;
}

nlohmann::json ConvolutionKernel::header() const {
    nlohmann::json j = {{"A_half", A_half}, {"singularity", to_string(singularity)}, {"gamma_shift", gamma_shift}};
    if (singularity == Singularity::Power) j["sigma"] = sigma;
    if (singularity == Singularity::Log) j["log_coeff"] = log_coeff;
    j["origin"] = origin;
    return j;
}

void ConvolutionKernel::dump(std::ostream& os, const std::vector<double>& ys) const {
    os << "# " << header().dump() << "\n";
    os << "y,k\n";
    os << std::setprecision(17);
    for (double y : ys) os << y << "," << (*this)(y) << "\n";
}

ConvolutionKernel build_kernel(const LevyModel& model) {
    if (model.A < 0.0) throw ValidationError("Gaussian coefficient must be nonnegative");
    if (model.is_stable()) return stable_kernel(model);
    ConvolutionKernel k;
    k.A_half = 0.5 * model.A;
    if (std::holds_alternative<Gaussian>(model.spec)) {
        k.k0 = [](double) { return 0.0; };
        k.k0_antiderivative = [](double) { return 0.0; };
        k.even = true;
        k.gamma_shift = -model.gamma;
        k.origin = "pure diffusion";
        return k;
    }
    auto [s0, sinf] = density_exponents(model);
    // The kernel keeps its own copy of the model.
    auto owned = std::make_shared<LevyModel>(model);
    auto nu = std::make_shared<Nu>([owned](double y) { return levy_density(*owned, y); });
    auto gp = [&](double t) { return t * (*nu)(t); };
    auto gm = [&](double t) { return t * (*nu)(-t); };

    std::function<double(double)> exact;
    if (s0 < 2.0 - kEps && sinf > 1.0 + kEps) {
        exact = [nu](double y) { return y == 0.0 ? 0.0 : k0_uncompensated(*nu, y); };
        double m0 = quad::endpoint_singular(gp, 0.0, 1.0, 1e-13) - quad::endpoint_singular(gm, 0.0, 1.0, 1e-13);
        k.gamma_shift = -(model.gamma - m0);
        k.origin = "uncompensated jump kernel";
        k.singularity = Singularity::None;
    } else if (sinf > 2.0 + kEps && s0 < 3.0 - kEps) {
        exact = [nu](double y) { return y == 0.0 ? kInf : k0_tail(*nu, y); };
        double m1 = quad::half_infinite(gp, 1.0, 1e-14) - quad::half_infinite(gm, 1.0, 1e-14);
        k.gamma_shift = -(model.gamma + m1);
        k.origin = "compensated tail-integral kernel";
        k.monotone_tails = true;
        if (std::abs(s0 - 2.0) <= kEps) {
            k.singularity = Singularity::Log;
            double y = 1e-9;
            k.log_coeff = 0.5 * y * y * ((*nu)(y) + (*nu)(-y));
        } else if (s0 > 2.0) {
            k.singularity = Singularity::Power;
            k.sigma = s0 - 2.0;
        }
    } else {
        throw ValidationError(
            "no convolution kernel: need either x nu(x) -> 0 at the origin (local integrability of |x| nu') or a "
            "finite first tail moment with int y^2 nu' < inf near 0");
    }
    auto table = std::make_shared<LogTable>(exact, 1e-10, 1e3, 48, k.singularity, k.sigma, k.log_coeff);
    k.k0 = [table, exact](double y) { return y == 0.0 ? exact(0.0) : (*table)(y); };
    k.even = true;
    for (double y : {1e-3, 0.1, 0.7, 2.0}) {
        double a = k.k0(y), b = k.k0(-y);
        if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), 1.0)) k.even = false;
    }
    return k;
}

void SampledFunction::validate() const {
    if (grid.size() != values.size()) throw DomainError("sampled function grid and values differ in length");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw DomainError("sampled function grid must be strictly increasing");
    for (double v : values)
        if (!std::isfinite(v)) throw DomainError("sampled function has non-finite values");
}

namespace {

// Local basis for cell j: nodes first..first+deg with Lagrange polynomials.
struct Stencil {
    int first = 0;
    int count = 2;
};

Stencil stencil_for(int j, int n, Interpolation interp) {
    if (interp == Interpolation::Linear || n < 4) return {j, 2};
    return {std::clamp(j - 1, 0, n - 4), 4};
}

double lagrange(const std::vector<double>& x, const Stencil& st, int m, double y) {
    double v = 1.0;
    for (int q = 0; q < st.count; ++q)
        if (q != m) v *= (y - x[st.first + q]) / (x[st.first + m] - x[st.first + q]);
    return v;
}

// Moments int_cell k(y - xi) l_m(y) dy for the stencil's basis.
void cell_moments(const ConvolutionKernel& K, const std::vector<double>& x, double xi, int j, const Stencil& st,
                  bool singular_left, bool singular_right, double out[4]) {
    for (int m = 0; m < 4; ++m) out[m] = 0.0;
    double a = x[j], b = x[j + 1];
    auto add_panel = [&](double lo, double hi, int order) {
        const auto& r = quad::gauss_legendre(order);
        double h = 0.5 * (hi - lo), c = 0.5 * (hi + lo);
        for (std::size_t q = 0; q < r.x.size(); ++q) {
            double y = c + h * r.x[q];
            double kw = h * r.w[q] * K(y - xi);
            for (int m = 0; m < st.count; ++m) out[m] += kw * lagrange(x, st, m, y);
        }
    };
    if (!singular_left && !singular_right) {
        add_panel(a, b, 16);
        return;
    }
    // Geometric grading toward the singular end; the innermost sliver uses the exact kernel integral.
    const int levels = 40;
    double len = b - a;
    if (singular_left) {
        double hi = b;
        for (int l = 0; l < levels; ++l) {
            double lo = a + len * std::ldexp(1.0, -(l + 1));
            add_panel(lo, hi, 8);
            hi = lo;
        }
        double w = K.integral(a - xi, hi - xi);
        for (int m = 0; m < st.count; ++m) out[m] += w * lagrange(x, st, m, a);
    } else {
        double lo = a;
        for (int l = 0; l < levels; ++l) {
            double hi = b - len * std::ldexp(1.0, -(l + 1));
            add_panel(lo, hi, 8);
            lo = hi;
        }
        double w = K.integral(lo - xi, b - xi);
        for (int m = 0; m < st.count; ++m) out[m] += w * lagrange(x, st, m, b);
    }
}

bool is_uniform(const std::vector<double>& x) {
    double h = (x.back() - x.front()) / (x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i)
        if (std::abs((x[i] - x[i - 1]) - h) > 1e-12 * h) return false;
    return true;
}

}  // namespace

Eigen::MatrixXd s_matrix(const ConvolutionKernel& K, const std::vector<double>& x, Interpolation interp) {
    const int n = static_cast<int>(x.size());
    if (n < 2) throw DomainError("operator S needs at least two grid nodes");
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    const bool uniform = is_uniform(x);
    // Toeplitz cache keyed by (cell - target, stencil shift) on uniform grids.
    std::map<std::pair<int, int>, std::array<double, 4>> cache;
    double mom[4];
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j + 1 < n; ++j) {
            Stencil st = stencil_for(j, n, interp);
            bool sl = (i == j), sr = (i == j + 1);
            if (uniform) {
                auto key = std::make_pair(j - i, st.first - j);
                auto it = cache.find(key);
                if (it == cache.end()) {
                    cell_moments(K, x, x[i], j, st, sl, sr, mom);
                    it = cache.emplace(key, std::array<double, 4>{mom[0], mom[1], mom[2], mom[3]}).first;
                }
                for (int m = 0; m < st.count; ++m) W(i, st.first + m) += it->second[m];
            } else {
                cell_moments(K, x, x[i], j, st, sl, sr, mom);
                for (int m = 0; m < st.count; ++m) W(i, st.first + m) += mom[m];
            }
        }
        W(i, i) += K.A_half;
    }
    return W;
}

SampledFunction apply_S(const ConvolutionKernel& kernel, const SampledFunction& f, Interpolation interp) {
    f.validate();
    Eigen::MatrixXd W = s_matrix(kernel, f.grid, interp);
    Eigen::Map<const Eigen::VectorXd> v(f.values.data(), f.values.size());
    Eigen::VectorXd r = W * v;
    SampledFunction out;
    out.grid = f.grid;
    out.values.assign(r.data(), r.data() + r.size());
    return out;
}

SampledFunction apply_generator(const LevyModel& model, const SampledFunction& f, GeneratorPath path) {
    if (path == GeneratorPath::Factorized) return apply_generator(model, build_kernel(model), f, path);
    return apply_generator(model, ConvolutionKernel{}, f, path);
}

SampledFunction apply_generator(const LevyModel& model, const ConvolutionKernel& kernel, const SampledFunction& f,
                                GeneratorPath path) {
    f.validate();
    const int n = static_cast<int>(f.grid.size());
    if (n < 8) throw DomainError("grid too coarse for second derivatives: need at least 8 nodes");
    const bool cdelta = f.boundary == BoundaryClass::CDelta;
    CubicSpline sp(f.grid, f.values, cdelta ? CubicSpline::End::Clamped : CubicSpline::End::NotAKnot, 0.0, 0.0);
    SampledFunction out;
    out.grid = f.grid;
    out.values.assign(n, 0.0);

    if (path == GeneratorPath::Factorized) {
        const auto& M = sp.second_derivatives();
        Eigen::MatrixXd W = s_matrix(kernel, f.grid, Interpolation::Linear);
        Eigen::Map<const Eigen::VectorXd> m(M.data(), n);
        Eigen::VectorXd r = W * m;
        for (int i = 0; i < n; ++i) out.values[i] = r[i];
        return out;
    }

    const double A = triplet_A(model), gam = triplet_drift(model);
    const auto& x = f.grid;
    const bool jumps = has_jumps(model);
    Nu nu = [&model](double y) { return levy_density(model, y); };
    double fmax = 0.0;
    for (double v : f.values) fmax = std::max(fmax, std::abs(v));
    const double roundoff = 1e-13 * fmax;

    for (int i = 0; i < n; ++i) {
        const double xi = x[i];
        const double F = f.values[i];
        // Clamped ends carry exactly zero slope.
        const double dF = (cdelta && (i == 0 || i == n - 1)) ? 0.0 : sp.derivative(xi);
        const double d2F = sp.second_derivatives()[i];
        double v = 0.5 * A * d2F + gam * dF;
        if (!jumps) {
            out.values[i] = v;
            continue;
        }
        double J = 0.0;
        // Pieces of the spline support, in the jump variable y = t - xi.
        for (int k = 0; k + 1 < n; ++k) {
            double a = x[k] - xi, b = x[k + 1] - xi;
            std::vector<double> cuts = {a};
            for (double c : {-1.0, 1.0})
                if (c > a && c < b) cuts.push_back(c);
            cuts.push_back(b);
            const bool adjacent = (k == i || k + 1 == i);
            double c0, c1, c2, c3;
            sp.coefficients(k, c0, c1, c2, c3);
            double tc2 = 0.0, tc3 = c3;  // Taylor about xi on this piece
            if (adjacent) {
                double u = xi - x[k];
                tc2 = c2 + 3.0 * c3 * u;
            }
            for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
                double lo = cuts[p], hi = cuts[p + 1];
                double mid = 0.5 * (lo + hi);
                bool compensated = std::abs(mid) <= 1.0;
                if (adjacent) {
                    auto g = [&](double y) {
                        double poly = tc2 * y * y + tc3 * y * y * y;
                        if (!compensated) poly += dF * y;
                        return poly * nu(y);
                    };
                    bool sing_lo = (lo == 0.0), sing_hi = (hi == 0.0);
                    if (!sing_lo && !sing_hi) {
                        J += quad::fixed(g, lo, hi, 16);
                    } else {
                        // Graded panels toward y = 0.
                        double len = hi - lo;
                        for (int l = 0; l < 48; ++l) {
                            double p1 = std::ldexp(1.0, -l), p2 = std::ldexp(1.0, -(l + 1));
                            if (sing_lo)
                                J += quad::fixed(g, lo + len * p2, lo + len * p1, 8);
                            else
                                J += quad::fixed(g, hi - len * p1, hi - len * p2, 8);
                        }
                    }
                } else {
                    auto g = [&](double y) {
                        double t = xi + y;
                        double u = t - x[k];
                        double Ft = c0 + u * (c1 + u * (c2 + u * c3));
                        double d = Ft - F - (compensated ? y * dF : 0.0);
                        return d * nu(y);
                    };
                    J += quad::fixed(g, lo, hi, 16);
                }
            }
        }
        // Outside the support the extension is zero.
        bool bad = false;
        for (double side : {-1.0, 1.0}) {
            double d = side > 0 ? x[n - 1] - xi : xi - x[0];
            if (d <= 0.0) {
                if (std::abs(F) > roundoff || std::abs(dF) > roundoff) bad = true;
                continue;
            }
            if (F != 0.0) J -= F * tail_mass(nu, side, d);
            if (dF != 0.0) J -= dF * side * near_first_moment(nu, side, d);
        }
        out.values[i] = bad ? std::numeric_limits<double>::quiet_NaN() : v + J;
    }
    return out;
}

}  // namespace levy

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "levy/kernels.hpp"
#include "levy/quadrature.hpp"

namespace levy {

namespace {

using boost::math::quadrature::ooura_fourier_cos;
using boost::math::quadrature::ooura_fourier_sin;

ooura_fourier_cos<double>& cos_integrator() {
    thread_local ooura_fourier_cos<double> q(1e-12, 8);
    return q;
}
ooura_fourier_sin<double>& sin_integrator() {
    thread_local ooura_fourier_sin<double> q(1e-12, 8);
    return q;
}

// int_1^inf g(t) cos(x t) dt via the shift t = 1 + u.
double cos_tail(const std::function<double(double)>& g, double x) {
    auto h = [&](double u) { return g(1.0 + u); };
    double c = cos_integrator().integrate(h, x).first;
    double s = sin_integrator().integrate(h, x).first;
    return std::cos(x) * c - std::sin(x) * s;
}

const std::vector<double> kFrequencies = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};

void cosine_probe(const ConvolutionKernel& kernel, const LevyModel* model, SectorReport& r) {
    if (!kernel.monotone_tails || !kernel.k0) return;
    auto kbar = [&](double t) { return kernel.k0(t) + kernel.k0(-t); };
    r.cosine_positive = true;
    for (double x : kFrequencies) {
        double near = quad::endpoint_singular(
            [&](double t) { return t < 1e-200 ? 0.0 : kbar(t) * std::cos(x * t); }, 0.0, 1.0, 1e-12);
        double lhs = near + cos_tail(kbar, x);
        r.frequencies.push_back(x);
        r.cosine_transform.push_back(lhs);
        if (!(lhs > 0.0)) r.cosine_positive = false;
        if (model) {
            auto nbar = [&](double t) { return levy_density(*model, t) + levy_density(*model, -t); };
            double s2 = quad::endpoint_singular(
                [&](double t) {
                    if (t < 1e-100) return 0.0;
                    double v = std::sin(0.5 * x * t);
                    return 2.0 * v * v * nbar(t);
                },
                0.0, 1.0, 1e-12);
            double mass = quad::half_infinite(nbar, 1.0, 1e-14);
            double rhs = (s2 + mass - cos_tail(nbar, x)) / (x * x);
            r.cosine_transform_rhs.push_back(rhs);
            if (!(rhs > 0.0)) r.cosine_positive = false;
        }
    }
}

std::vector<double> trapezoid_weights(const std::vector<double>& x) {
    std::vector<double> w(x.size(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        double h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    return w;
}

}  // namespace

SectorReport sector_diagnostics(const ConvolutionKernel& kernel, const std::vector<ComplexSampledFunction>& trials,
                                const LevyModel* model) {
    SectorReport r;
    cosine_probe(kernel, model, r);
    r.trials = static_cast<int>(trials.size());
    r.min_abs_form = std::numeric_limits<double>::infinity();
    std::vector<double> grid;
    Eigen::MatrixXd W;
    std::vector<double> w;
    for (const auto& f : trials) {
        if (f.grid != grid) {
            grid = f.grid;
            W = s_matrix(kernel, grid, Interpolation::Cubic);
            w = trapezoid_weights(grid);
        }
        const int n = static_cast<int>(grid.size());
        Eigen::VectorXcd v(n);
        for (int i = 0; i < n; ++i) v[i] = f.values[i];
        Eigen::VectorXcd s = W.cast<std::complex<double>>() * v;
        std::complex<double> form = 0.0;
        for (int i = 0; i < n; ++i) form += w[i] * s[i] * std::conj(v[i]);
        double arg = std::abs(std::arg(form));
        r.max_abs_arg = std::max(r.max_abs_arg, arg);
        r.min_abs_form = std::min(r.min_abs_form, std::abs(form));
    }
    if (trials.empty()) r.min_abs_form = 0.0;
    r.beta_hat = r.max_abs_arg / (0.5 * std::numbers::pi);
    r.sectorial = !trials.empty() && r.max_abs_arg < 0.5 * std::numbers::pi && r.min_abs_form > 0.0;
    return r;
}

SectorReport sector_diagnostics(const ConvolutionKernel& kernel, const std::vector<SampledFunction>& trials,
                                const LevyModel* model) {
    std::vector<ComplexSampledFunction> c;
    c.reserve(trials.size());
    for (const auto& f : trials) {
        ComplexSampledFunction g;
        g.grid = f.grid;
        g.values.assign(f.values.begin(), f.values.end());
        c.push_back(std::move(g));
    }
    return sector_diagnostics(kernel, c, model);
}

std::vector<ComplexSampledFunction> random_trials(double lo, double hi, int n_nodes, int count, std::uint64_t seed,
                                                  bool complex_valued) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const int modes = 6;
    std::vector<double> grid(n_nodes);
    for (int i = 0; i < n_nodes; ++i) grid[i] = lo + (hi - lo) * i / (n_nodes - 1);
    std::vector<ComplexSampledFunction> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        std::vector<std::complex<double>> c(modes);
        for (int m = 0; m < modes; ++m) {
            double re = gauss(rng), im = complex_valued ? gauss(rng) : 0.0;
            c[m] = std::complex<double>(re, im) / double((m + 1) * (m + 1));
        }
        ComplexSampledFunction f;
        f.grid = grid;
        f.values.resize(n_nodes);
        for (int i = 0; i < n_nodes; ++i) {
            double s = (grid[i] - lo) / (hi - lo);
            std::complex<double> v = 0.0;
            for (int m = 0; m < modes; ++m) v += c[m] * std::sin((m + 1) * std::numbers::pi * s);
            f.values[i] = v;
        }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace levy

#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "levy/errors.hpp"
#include "levy/kernels.hpp"
#include "levy/quadrature.hpp"
#include "levy/spline.hpp"

namespace levy {

namespace {

constexpr double kCutTolerance = 1e-10;
constexpr double kSingularTolerance = 1e-10;
constexpr std::size_t kMaxPoints = std::size_t(1) << 23;

}  // namespace

CompoundPoissonPotential::CompoundPoissonPotential(const LevyModel& model, double spatial_half_width) {
    auto report = validate_model(model);
    const auto* mass = report.find("finite_jump_mass");
    const auto* sq = report.find("square_integrable_density");
    if (!mass || !mass->passed) throw ValidationError("compound Poisson potential needs a finite jump mass");
    if (!sq || !sq->passed) throw ValidationError("compound Poisson potential needs a square-integrable Levy density");
    if (model.A != 0.0 || model.gamma != 0.0)
        throw UnsupportedError("compound Poisson potential is defined for A = 0 and zero drift");
    mass_ = jump_mass(model);
    const double L = spatial_half_width;
    const double sqrt2pi = std::sqrt(2.0 * std::numbers::pi);

    Eigen::FFT<double> fft;
    std::size_t N = 1024;
    std::vector<std::complex<double>> in, out;
    for (;;) {
        dx_ = 2.0 * L / N;
        in.assign(N, 0.0);
        for (std::size_t j = 0; j < N; ++j) {
            double x = -L + j * dx_;
            // The density is bounded here; take the two-sided limit at the origin.
            in[j] = x == 0.0 ? 0.5 * (levy_density(model, 1e-300) + levy_density(model, -1e-300))
                             : levy_density(model, x);
        }
        fft.fwd(out, in);
        u_cut_ = std::numbers::pi / dx_;
        // nu_hat(u_k) = dx e^{-i u_k L} conj(F_k); e^{-i u_k L} = (-1)^k on this grid.
        std::complex<double> nyq = dx_ * ((N / 2) % 2 ? -1.0 : 1.0) * std::conj(out[N / 2]);
        k_cut_ = std::abs(nyq) / (mass_ * sqrt2pi);
        if (k_cut_ < kCutTolerance) break;
        if (N >= kMaxPoints)
            throw NumericalError("Levy density transform does not fall below the cut tolerance", 0.0, k_cut_);
        N *= 2;
    }
    std::vector<std::complex<double>> nhat(N);
    for (std::size_t k = 0; k < N; ++k) {
        double sgn = (k % 2) ? -1.0 : 1.0;
        std::complex<double> nu_hat = dx_ * sgn * std::conj(out[k]);
        std::complex<double> K = -nu_hat / (mass_ * sqrt2pi);
        std::complex<double> denom = 1.0 - sqrt2pi * K;
        if (k != 0 && std::abs(denom) < kSingularTolerance)
            throw NumericalError("singular resolvent: 1 - sqrt(2 pi) K(u) vanishes away from u = 0", 0.0,
                                 std::abs(denom));
        std::complex<double> Nk = K / denom;
        nhat[k] = sqrt2pi * Nk * sgn;
    }
    fft.fwd(out, nhat);
    x_.resize(N);
    n_.resize(N);
    for (std::size_t j = 0; j < N; ++j) {
        x_[j] = -L + j * dx_;
        n_[j] = out[j].real() / (N * dx_);
    }
}

double CompoundPoissonPotential::n(double x) const {
    if (x < x_.front() || x > x_.back()) return 0.0;
    double u = (x - x_.front()) / dx_;
    std::size_t j = std::min(static_cast<std::size_t>(u), x_.size() - 2);
    double t = u - j;
    return (1.0 - t) * n_[j] + t * n_[j + 1];
}

double CompoundPoissonPotential::apply(const SampledFunction& f, double x) const {
    CubicSpline sp(f.grid, f.values, f.boundary == BoundaryClass::CDelta ? CubicSpline::End::Clamped
                                                                          : CubicSpline::End::NotAKnot);
    double fx = (x < sp.lo() || x > sp.hi()) ? 0.0 : sp(x);
    double conv = 0.0;
    auto g = [&](double y) { return n(x - y) * sp(y); };
    for (std::size_t k = 0; k + 1 < f.grid.size(); ++k) {
        double a = f.grid[k], b = f.grid[k + 1];
        if (x > a && x < b) {
            conv += quad::fixed(g, a, x, 16) + quad::fixed(g, x, b, 16);
        } else {
            conv += quad::fixed(g, a, b, 16);
        }
    }
    return (fx + conv) / mass_;
}

SampledFunction compound_poisson_potential(const LevyModel& model, const SampledFunction& f) {
    f.validate();
    CompoundPoissonPotential Q(model);
    SampledFunction out;
    out.grid = f.grid;
    out.boundary = f.boundary;
    out.values.resize(f.grid.size());
    for (std::size_t i = 0; i < f.grid.size(); ++i) out.values[i] = Q.apply(f, f.grid[i]);
    return out;
}

}  // namespace levy

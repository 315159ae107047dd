#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "levy/models.hpp"

namespace levy {

enum class Singularity { None, Log, Power };
std::string to_string(Singularity s);

/// Kernel of S f = (A/2) f + int k(y - x) f(y) dy, with k = k0 + gamma_shift * sign/2.
struct ConvolutionKernel {
    std::function<double(double)> k0;
    /// Antiderivative of k0 vanishing at 0; empty when only numerical integration is available.
    std::function<double(double)> k0_antiderivative;
    double A_half = 0.0;
    Singularity singularity = Singularity::None;
    double sigma = 0.0;     ///< k0 ~ |y|^-sigma near 0 (Power)
    double log_coeff = 0.0; ///< k0 ~ -log_coeff * log|y| near 0 (Log)
    double gamma_shift = 0.0;
    bool even = false;      ///< k0(-y) == k0(y)
    bool monotone_tails = false;  ///< built from tail integrals of nu' (cosine transform positive)
    std::string origin;

    double operator()(double y) const;
    /// int_lo^hi k(u) du, exact when the antiderivative is known.
    double integral(double lo, double hi) const;
    /// Kernel dump: CSV rows "y,k" preceded by a JSON header line.
    void dump(std::ostream& os, const std::vector<double>& ys) const;
    nlohmann::json header() const;
};

ConvolutionKernel build_kernel(const LevyModel& model);

enum class BoundaryClass { General, CDelta };

struct SampledFunction {
    std::vector<double> grid;
    std::vector<double> values;
    BoundaryClass boundary = BoundaryClass::General;

    void validate() const;
    std::size_t size() const { return grid.size(); }
};

struct ComplexSampledFunction {
    std::vector<double> grid;
    std::vector<std::complex<double>> values;
};

enum class Interpolation { Linear, Cubic };

/// Matrix W with (S f)(x_i) = sum_j W_ij f_j for the piecewise-polynomial interpolant of f.
Eigen::MatrixXd s_matrix(const ConvolutionKernel& kernel, const std::vector<double>& grid,
                         Interpolation interp = Interpolation::Cubic);

SampledFunction apply_S(const ConvolutionKernel& kernel, const SampledFunction& f,
                        Interpolation interp = Interpolation::Cubic);

enum class GeneratorPath {
    Direct,      ///< compensated jump integral against the Lévy density
    Factorized,  ///< (d/dx) S (d/dx) with spline derivatives
};

/// L f at the grid nodes, f taken as its cubic spline extended by zero. Clamped (zero-slope)
/// spline ends for C_Delta functions, not-a-knot otherwise. Endpoint nodes where the zero
/// extension is discontinuous are returned as NaN on the direct path. The factorized path
/// integrates by parts, so it needs f' to vanish at the ends as well.
SampledFunction apply_generator(const LevyModel& model, const SampledFunction& f,
                                GeneratorPath path = GeneratorPath::Direct);
SampledFunction apply_generator(const LevyModel& model, const ConvolutionKernel& kernel, const SampledFunction& f,
                                GeneratorPath path);

struct SectorReport {
    std::vector<double> frequencies;
    std::vector<double> cosine_transform;      ///< int k(t) cos(x t) dt
    std::vector<double> cosine_transform_rhs;  ///< int nu'(t)(1 - cos x t)/x^2 dt (when a model is given)
    bool cosine_positive = false;
    int trials = 0;
    double max_abs_arg = 0.0;  ///< max |arg (S f, f)| over trials
    double beta_hat = 0.0;     ///< max_abs_arg / (pi/2)
    bool sectorial = false;    ///< max_abs_arg < pi/2 and no vanishing form
    double min_abs_form = 0.0;
};

SectorReport sector_diagnostics(const ConvolutionKernel& kernel, const std::vector<ComplexSampledFunction>& trials,
                                const LevyModel* model = nullptr);
SectorReport sector_diagnostics(const ConvolutionKernel& kernel, const std::vector<SampledFunction>& trials,
                                const LevyModel* model = nullptr);

/// Smooth random trial functions vanishing at the ends of [lo, hi].
std::vector<ComplexSampledFunction> random_trials(double lo, double hi, int n_nodes, int count, std::uint64_t seed,
                                                  bool complex_valued = true);

/// Potential of a compound Poisson process, Q f = (f + n * f)/M, from the Fourier pipeline.
class CompoundPoissonPotential {
public:
    CompoundPoissonPotential(const LevyModel& model, double spatial_half_width = 40.0);

    /// n(x) by linear interpolation of the transformed samples; 0 outside the grid.
    double n(double x) const;
    /// (Q f)(x) for f given as a cubic spline (zero outside its grid).
    double apply(const SampledFunction& f, double x) const;
    double mass() const { return mass_; }
    double frequency_cut() const { return u_cut_; }
    double k_at_cut() const { return k_cut_; }
    const std::vector<double>& n_grid() const { return x_; }
    const std::vector<double>& n_values() const { return n_; }

private:
    double mass_ = 0.0, dx_ = 0.0, u_cut_ = 0.0, k_cut_ = 0.0;
    std::vector<double> x_, n_;
};

SampledFunction compound_poisson_potential(const LevyModel& model, const SampledFunction& f);

}  // namespace levy

#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "levy/kernels.hpp"
#include "levy/quasipotential.hpp"

namespace levy {

using cplx = std::complex<double>;

/// Nystrom discretization of (B f)(x) = int Phi(x, y) f(y) dy on Gauss-Legendre nodes.
/// The diagonal carries the singularity subtraction M_ii = R(x_i) - sum_{j != i} w_j Phi(x_i, x_j),
/// with R(x) = int Phi(x, y) dy, so every row sums to the exact row integral.
struct NystromSystem {
    std::vector<double> nodes, weights;
    std::vector<double> row_integrals;
    Eigen::MatrixXd matrix;
    std::shared_ptr<const QuasiPotentialKernel> kernel;
    double lo = 0.0, hi = 0.0;

    int size() const { return static_cast<int>(nodes.size()); }
    /// sum_j w_j Phi(x, x_j) and the subtraction defect D(x) = R(x) - that sum.
    void interpolation_row(double x, Eigen::VectorXd& row, double& defect) const;
};

NystromSystem assemble(const QuasiPotentialKernel& kernel, int n);

struct SpectralDecomposition {
    std::shared_ptr<const NystromSystem> system;
    std::vector<cplx> eigenvalues;  ///< descending modulus
    Eigen::MatrixXcd right;         ///< columns g_k at the nodes
    Eigen::MatrixXcd left;          ///< rows y_k with y_k . g_l = delta_kl; h_k = y_k / w
    std::vector<cplx> h_integrals;  ///< int h_k = sum_i y_k,i
    std::vector<bool> defective;
    double eigvec_rcond = 0.0;
    bool symmetric = false;

    int size() const { return static_cast<int>(eigenvalues.size()); }
    /// g_k at an arbitrary point by Nystrom interpolation.
    cplx g(int k, double x) const;
    /// h_k at the nodes.
    Eigen::VectorXcd h(int k) const;
    /// int over [lo, hi] of h_k.
    cplx h_integral(int k, double lo, double hi) const;
};

/// Top-k eigenpairs (k = 0 keeps all n).
SpectralDecomposition eigensystem(const NystromSystem& sys, int k = 0);

enum class SurvivalMethod { SpectralSeries, Asymptotic, Resolvent };
std::string to_string(SurvivalMethod m);

struct SurvivalEstimate {
    std::vector<double> times, values, remainder_bounds;
    SurvivalMethod method = SurvivalMethod::SpectralSeries;
    double lambda1 = 0.0, c1 = 0.0;
    int terms = 0;
    std::vector<std::string> warnings;
};

/// Number of terms used by default: eigenvalues with |lambda_k| / lambda_1 > 1e-3, at most 50.
int default_terms(const SpectralDecomposition& dec);

SurvivalEstimate survival_series(const SpectralDecomposition& dec, const std::vector<double>& times, int terms = 0);
double survival_series(const SpectralDecomposition& dec, double t, int terms = 0);

struct LeadingAsymptotics {
    double lambda1 = 0.0, c1 = 0.0;
};
LeadingAsymptotics leading_asymptotics(const SpectralDecomposition& dec);
SurvivalEstimate asymptotic_survival(const SpectralDecomposition& dec, const std::vector<double>& times);

/// g_1(x0) int_{sub} h_1 for a starting point x0 inside the sub-interval.
double conditional_asymptotics(const SpectralDecomposition& dec, double x0, const Interval& sub);

struct ResolventResult {
    SampledFunction psi;  ///< psi(x, s) at the nodes
    double integral = 0.0;  ///< int psi(x, s) dx
    double s = 0.0;
};
/// psi = (I + s B*)^{-1} Phi(0, .) on the Nystrom grid.
ResolventResult resolvent_psi(const NystromSystem& sys, double s);

double stable_scaling(double lambda1_unit, double a, double alpha);
double stable_scaling(const LevyModel& model, double lambda1_unit, double a);

enum class RegimeKind { Infinity, Zero, Finite };
enum class RegimeLimit { LimitZero, LimitOne, LimitPT };
struct RegimeResult {
    RegimeLimit limit;
    double value;
};
/// Limit of p(t, a(t)) as t/a(t)^alpha tends to infinity, zero or T.
RegimeResult regime_classify(double alpha, RegimeKind kind, double T = 0.0,
                             const SpectralDecomposition* unit_dec = nullptr);

struct RegularityReport {
    double min_phi = 0.0;
    double max_boundary = 0.0;
    double sector_half_angle = 0.0;
    int trials = 0;
    bool disk_ok = false;          ///< every eigenvalue in |z - lambda1/2| <= lambda1/2
    bool unit_disk_ok = false;     ///< the radius-1/2 reading of the same statement
    double max_disk_excess = 0.0;  ///< max (|z - lambda1/2| - lambda1/2) / lambda1
    int boundary_eigenvalues = 0;
    bool boundary_index_one = true;
    bool conjugate_pairs = true;
    double max_imag = 0.0;
};
RegularityReport regularity_report(const NystromSystem& sys, const SpectralDecomposition& dec, int trials = 200,
                                   std::uint64_t seed = 11);

nlohmann::json spectrum_json(const SpectralDecomposition& dec, int max_eigenvalues = 50);
void write_survival_csv(const SurvivalEstimate& est, std::ostream& os);

}  // namespace levy

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "levy/kernels.hpp"
#include "levy/models.hpp"

namespace levy {

enum class QPKind { StableCase1, StableOneSided, Cauchy, WienerGreen, GridBacked };
enum class DiagonalSingularity { None, Log, Power };

std::string to_string(QPKind k);
std::string to_string(DiagonalSingularity d);

struct StableCase1Params {
    double alpha = 0.0, beta = 0.0, mu = 0.0, rho = 0.0, C_alpha = 0.0;
};

/// Solves sin(pi rho) = ((1-beta)/(1+beta)) sin(pi (mu - rho)), mu = 2 - alpha, and forms C_alpha.
StableCase1Params stable_case1_params(double alpha, double beta);
/// Case-1 kernel on [-a, a] with precomputed constants.
double stable_kernel_case1_with(const StableCase1Params& p, double a, double x, double y);

/// Piecewise-constant solutions of S N_k = x^{k-1} on a graded mesh of [-c, c].
struct FactorizationData {
    double c = 0.0;
    std::vector<double> nodes;  ///< n + 1 cell boundaries
    std::vector<double> N1, N2; ///< cell values
    double r = 0.0;             ///< integral of N1
    double rcond = 0.0;
    bool ill_conditioned = false;

    double n1(double t) const;  ///< zero outside [-c, c]
    double n2(double t) const;
    /// q(u, v) = [N1(-v) N2(u) - N2(-v) N1(u)] / r
    double q(double u, double v) const;
    /// Exact integral of q(t, t - (x - y)) over t in [x, min(c, c + x - y)].
    double phi(double x, double y) const;
    /// Majorant phi(d) = int |N1(d - t) N2(t)| + |N2(d - t) N1(t)| dt / |r|.
    double majorant(double d) const;
    int cell(double t) const;
};

struct GridTable {
    std::vector<double> xs, ys;
    std::vector<double> values;  ///< row-major, xs.size() x ys.size()
    double at(std::size_t i, std::size_t j) const { return values[i * ys.size() + j]; }
    double bilinear(double x, double y) const;
};

class QuasiPotentialKernel {
public:
    QPKind kind = QPKind::WienerGreen;
    double lo = -1.0, hi = 1.0;  ///< domain [-b, a]
    DiagonalSingularity diagonal = DiagonalSingularity::None;
    double diagonal_exponent = 0.0;  ///< Phi ~ |x-y|^-exponent for Power
    StableCase1Params stable;
    double scale_factor = 1.0;       ///< applied to the unit-normalized closed form

    std::function<double(double, double)> eval_fn;
    /// int_lo^hi Phi(x, y) dy; numerical when empty.
    std::function<double(double)> row_integral_fn;

    std::shared_ptr<const FactorizationData> construction;
    std::shared_ptr<const GridTable> grid;
    std::string warning;
    nlohmann::json imported_header;  ///< header read by import_grid, echoed on export

    double operator()(double x, double y) const;
    double row_integral(double x) const;
    /// int_{y0}^{y1} Phi(x, y) dy by quadrature split at the diagonal.
    double integral_y(double x, double y0, double y1) const;
    double a() const { return hi; }
    double b() const { return -lo; }
    nlohmann::json header() const;
};

double stable_kernel_case1(double alpha, double beta, double a, double x, double y);
double stable_kernel_onesided(double alpha, double beta, double a, double x, double y);
/// Kac kernel for the Cauchy process with exponent (2/pi)|z|; throws DomainError on the diagonal.
double cauchy_kernel(double a, double x, double y);
double wiener_green(double a, double b, double x, double t);

struct SymmetricShift {
    double c = 0.0;
    double delta = 0.0;
};
SymmetricShift shift_to_symmetric(double b, double a);

/// Closed-form kernels on [-b, a], unit normalization times `scale_factor`.
QuasiPotentialKernel make_wiener_kernel(double b, double a, double A = 1.0);
QuasiPotentialKernel make_cauchy_kernel(double b, double a, double scale_factor = 1.0);
QuasiPotentialKernel make_stable_case1_kernel(double alpha, double beta, double b, double a, double scale_factor = 1.0);
QuasiPotentialKernel make_onesided_kernel(double alpha, double beta, double b, double a, double scale_factor = 1.0);

struct ConstructionOptions {
    int n = 256;
    double grading = 2.0;
    double rcond_warn = 1e-13;
};

/// Grid-backed kernel on [-c, c] from the convolution kernel of S.
QuasiPotentialKernel general_construction(const ConvolutionKernel& kernel, double c,
                                          const ConstructionOptions& opt = {});

/// Closed form when one exists for the model, otherwise the general construction
/// (only when allow_general is set). Non-symmetric domains are shifted.
QuasiPotentialKernel quasi_potential_for_model(const LevyModel& model, const Domain& domain, bool allow_general = true,
                                               const ConstructionOptions& opt = {});

struct MajorantViolation {
    double x, y, phi, bound;
};
struct MajorantReport {
    int probes = 0;
    double max_ratio = 0.0;
    std::vector<MajorantViolation> violations;
    bool passed() const { return violations.empty(); }
};

MajorantReport majorant_check(const QuasiPotentialKernel& kernel, int n_probes, std::uint64_t seed = 7);

/// CSV rows x,y,phi after a "# {json}" header line. Grid-backed kernels write their own grid;
/// closed forms are sampled at n+1 points in x and either the same points in y (singular
/// diagonal written as inf) or a staggered set that avoids it.
void export_grid(const QuasiPotentialKernel& kernel, std::ostream& os, int n = 64, bool uniform = false);
QuasiPotentialKernel import_grid(std::istream& is);

}  // namespace levy

#pragma once

#include <complex>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace levy {

using cplx = std::complex<double>;

/// Pure Gaussian part; the coefficient lives in LevyModel::A.
struct Gaussian {};

/// Stable law with exponent lambda(z) = scale*|z|^alpha*(1 - i beta sign(z) tan(pi alpha/2))
/// (log form at alpha = 1). c1, c2 are the matching Lévy density constants;
/// construct through stable_model() or stable_model_from_constants() so the two stay consistent.
struct Stable {
    double alpha = 1.5;
    double beta = 0.0;
    double scale = 1.0;
    double c1 = 0.0;
    double c2 = 0.0;
};

struct DampedStable {
    double c1 = 1.0, c2 = 1.0;
    double lambda1 = 1.0, lambda2 = 1.0;
    double alpha = 1.5;
};

struct VarianceGamma {
    double c1 = 1.0, c2 = 1.0;
    double G = 1.0, M = 1.0;
};

struct NormalInverseGaussian {
    double C = 1.0;
    double beta = 0.0;  ///< |beta| < 1 keeps the first tail moment finite
};

struct Meixner {
    double C = 1.0;
    double beta = 0.0;  ///< in (-pi, pi)
};

/// Finite-mass jump measure. `shape` names a closed form for serialization
/// ("laplace": weight*exp(-rate|y|), "gaussian": weight*exp(-y^2/(2 sigma^2))).
struct CompoundPoisson {
    std::function<double(double)> density;
    double mass = 0.0;
    std::string shape;
    double weight = 1.0;
    double rate = 1.0;
};

/// User-supplied density with power-law exponents: nu'(y) ~ |y|^-small_exponent
/// near 0 and ~ |y|^-tail_exponent at infinity (use a large value for exponential decay).
struct Custom {
    std::function<double(double)> density;
    double small_exponent = 0.0;
    double tail_exponent = 1e9;
    std::string name = "custom";
};

using DensitySpec = std::variant<Gaussian, Stable, DampedStable, VarianceGamma, NormalInverseGaussian,
                                 Meixner, CompoundPoisson, Custom>;

struct LevyModel {
    double A = 0.0;
    double gamma = 0.0;
    DensitySpec spec = Gaussian{};

    bool is_stable() const { return std::holds_alternative<Stable>(spec); }
    const Stable& stable() const { return std::get<Stable>(spec); }
    std::string kind() const;
};

struct Interval {
    double lo = -1.0;
    double hi = 1.0;
    double length() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

struct Domain {
    std::vector<Interval> intervals;

    static Domain single(double lo, double hi);
    void validate() const;
    bool contains(double x) const;
    double length() const;
    bool is_single() const { return intervals.size() == 1; }
};

// ---- constructors ----------------------------------------------------------

/// Density constant C with c1 = C(1-beta), c2 = C(1+beta) that reproduces the unit
/// stable exponent: alpha/(2 Gamma(1-alpha) cos(pi alpha/2)), and 1/pi at alpha = 1.
double stable_unit_constant(double alpha);

LevyModel gaussian_model(double A, double gamma = 0.0);

/// alpha = 2 maps to the Gaussian with A = scale (lambda = scale z^2/2).
LevyModel stable_model(double alpha, double beta, double scale = 1.0, double gamma = 0.0);

/// Stable model given the density constants; beta and scale are derived.
LevyModel stable_model_from_constants(double alpha, double c1, double c2, double gamma = 0.0);

/// Symmetric Cauchy process with lambda(z) = (2/pi)|z|, whose quasi-potential on
/// [-a, a] is Kac's logarithmic kernel.
LevyModel kac_cauchy_model();

LevyModel damped_stable_model(const DampedStable& p, double gamma = 0.0);
LevyModel variance_gamma_model(const VarianceGamma& p, double gamma = 0.0);
LevyModel nig_model(double C, double beta, double gamma = 0.0);
LevyModel meixner_model(double C, double beta, double gamma = 0.0);
/// nu'(y) = weight*exp(-rate|y|); mass 2 weight/rate.
LevyModel laplace_compound_poisson_model(double weight = 1.0, double rate = 1.0, double gamma = 0.0);
LevyModel compound_poisson_model(std::function<double(double)> density, double mass, double gamma = 0.0);
LevyModel custom_model(const Custom& c, double A = 0.0, double gamma = 0.0);

// ---- evaluation ------------------------------------------------------------

/// E exp(i z X_t) = exp(-t lambda(z)).
cplx characteristic_exponent(const LevyModel& model, double z);

/// lambda(z) from the Lévy-Khinchine integral over the model's triplet, including
/// stable models (no closed form used). Exposed for cross-checks.
cplx lk_exponent(const LevyModel& model, double z);

/// nu'(y), y != 0.
double levy_density(const LevyModel& model, double y);

/// Drift of the truncated (|y| <= 1) Lévy-Khinchine triplet. Differs from
/// model.gamma only for stable models, whose closed form fixes the compensator drift.
double triplet_drift(const LevyModel& model);

/// Gaussian coefficient of the triplet (alpha = 2 stable included).
double triplet_A(const LevyModel& model);

bool has_jumps(const LevyModel& model);

/// Finite total jump mass, or +inf.
double jump_mass(const LevyModel& model);

struct DensityValue {
    double value = 0.0;
    double cutoff = 0.0;      ///< truncation frequency Z
    double tail_bound = 0.0;  ///< exp(-t Re lambda(Z))
};

/// rho(x, t) by Fourier inversion truncated where exp(-t Re lambda) < 1e-12.
DensityValue transition_density_ex(const LevyModel& model, double x, double t);
double transition_density(const LevyModel& model, double x, double t);

// ---- validation ------------------------------------------------------------

struct ConditionCheck {
    std::string id;
    std::string description;
    bool applicable = true;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ConditionCheck> checks;
    double small_exponent = 0.0;  ///< s0 with nu'(y) ~ |y|^-s0 near 0
    double tail_exponent = 0.0;   ///< s_inf with nu'(y) ~ |y|^-s_inf at infinity
    double mass = 0.0;            ///< total jump mass, inf if infinite

    /// True when every applicable structural check passes (integrability conditions are informative).
    bool ok() const;
    const ConditionCheck* find(const std::string& id) const;
};

ValidationReport validate_model(const LevyModel& model);

/// Power-law exponents of the density near 0 and at infinity, estimated from log-slopes.
std::pair<double, double> density_exponents(const LevyModel& model);

// ---- serialization ---------------------------------------------------------

/// Parse a JSON descriptor {"kind": ..., ...}; unknown keys are rejected (ParseError), out-of-range
/// parameters raise ValidationError.
LevyModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const LevyModel& model);

}  // namespace levy

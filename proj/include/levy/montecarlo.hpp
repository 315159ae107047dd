#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "levy/errors.hpp"
#include "levy/models.hpp"

namespace levy::mc {

/// xoshiro256** with its state derived from (seed, stream) by splitmix64, so every path
/// owns an independent stream regardless of scheduling.
class PathRng {
public:
    using result_type = std::uint64_t;
    PathRng(std::uint64_t seed, std::uint64_t stream);
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }
    result_type operator()();
    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    double exponential();

private:
    std::uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct SimConfig {
    std::int64_t n_paths = 100000;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    bool bridge_correction = true;  ///< Gaussian models only; ignored otherwise
    bool antithetic = false;        ///< symmetric models only
    double x0 = 0.0;
    int threads = 0;                ///< 0: hardware concurrency
    /// Cap on n_paths * steps; 0 reads LEVY_EXIT_BUDGET, falling back to 4e9.
    double budget = 0.0;
};

struct MCEstimate {
    double p_hat = 0.0;
    double stderr_ = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    std::int64_t n_paths = 0;
    std::int64_t n_effective = 0;
    double dt = 0.0;  ///< step actually used (t / steps)
    std::int64_t steps = 0;
    bool bridge = false;
    std::vector<std::string> warnings;
};

class BudgetExceeded : public LevyError {
public:
    BudgetExceeded(const std::string& what, MCEstimate partial) : LevyError(what), partial_(std::move(partial)) {}
    const MCEstimate& partial() const { return partial_; }

private:
    MCEstimate partial_;
};

/// Increment sampler for one model; the setup (compensator, jump tables) is done once.
class IncrementSampler {
public:
    explicit IncrementSampler(const LevyModel& model);
    double sample(double dt, PathRng& rng) const;
    bool pure_gaussian() const { return kind_ == Kind::Gaussian; }
    bool symmetric() const { return symmetric_; }
    /// Deterministic part per unit time (reflection centre for antithetic pairs).
    double drift() const { return drift_; }
    double A() const { return A_; }

private:
    enum class Kind { Gaussian, Stable, CompoundPoisson, VarianceGamma };
    Kind kind_ = Kind::Gaussian;
    double A_ = 0.0, drift_ = 0.0;
    bool symmetric_ = false;
    // stable
    double alpha_ = 2.0, beta_ = 0.0, scale_ = 1.0;
    // compound Poisson
    double mass_ = 0.0;
    std::string shape_;
    double rate_ = 1.0;
    std::vector<double> cdf_y_, cdf_p_;
    // variance gamma
    double c1_ = 0.0, c2_ = 0.0, G_ = 1.0, M_ = 1.0;

    double jumps(double dt, PathRng& rng) const;
};

/// One draw of X_dt (one-shot convenience; builds the sampler each call).
double sample_increment(const LevyModel& model, double dt, PathRng& rng);

/// P(X stays in the domain at every grid time up to t), started at cfg.x0.
MCEstimate estimate_survival(const LevyModel& model, const Domain& domain, double t, const SimConfig& cfg);

/// Survival at several increasing times from one set of paths; each time is rounded to the
/// step grid fitted to the last one.
std::vector<MCEstimate> estimate_survival_curve(const LevyModel& model, const Domain& domain,
                                                const std::vector<double>& times, const SimConfig& cfg);

/// Same as estimate_survival, additionally requiring X_t in `sub`.
MCEstimate estimate_conditional(const LevyModel& model, const Domain& domain, const Interval& sub, double t,
                                const SimConfig& cfg);

/// P(sup_{tau <= t} X < a), started at cfg.x0.
MCEstimate estimate_hitting_survival(const LevyModel& model, double a, double t, const SimConfig& cfg);

/// Estimates at dt, dt/2, ..., dt/2^(levels-1) with the same seed.
std::vector<MCEstimate> dt_ladder(const LevyModel& model, const Domain& domain, double t, const SimConfig& cfg,
                                  int levels = 3);

struct EcfCheck {
    double z = 0.0;
    cplx empirical, expected;
    double stderr_re = 0.0, stderr_im = 0.0;
    double z_score = 0.0;  ///< max over real and imaginary parts
};
/// Empirical characteristic function of n increments at frequency z against exp(-dt lambda(z)).
EcfCheck ecf_check(const LevyModel& model, double dt, double z, std::int64_t n, std::uint64_t seed);

double resolve_budget(double configured);

nlohmann::json to_json(const MCEstimate& e);
nlohmann::json result_json(const MCEstimate& e, const LevyModel& model, const Domain& domain, const SimConfig& cfg);

}  // namespace levy::mc

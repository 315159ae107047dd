#include "levy/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include "levy/quadrature.hpp"

namespace levy::mc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kBlock = 4096;

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

struct Neumaier {
    double sum = 0.0, c = 0.0;
    void add(double v) {
        double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            c += (sum - t) + v;
        else
            c += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + c; }
};

bool symmetric_density(const std::function<double(double)>& f) {
    for (double y : {1e-3, 0.1, 0.5, 1.0, 2.5, 7.0}) {
        double a = f(y), b = f(-y);
        if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b))) return false;
    }
    return true;
}

}  // namespace

// ---- rng -------------------------------------------------------------------

PathRng::PathRng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed ^ rotl(stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL, 17);
    std::uint64_t k = stream;
    x ^= splitmix64(k);
    for (auto& s : s_) s = splitmix64(x);
}

PathRng::result_type PathRng::operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double PathRng::uniform() { return ((*this)() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

double PathRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

double PathRng::exponential() { return -std::log(uniform()); }

// ---- increments ------------------------------------------------------------

IncrementSampler::IncrementSampler(const LevyModel& model) {
    if (model.A < 0.0) throw DomainError("Gaussian coefficient must be nonnegative");
    A_ = model.A;
    if (std::holds_alternative<Gaussian>(model.spec)) {
        kind_ = Kind::Gaussian;
        drift_ = model.gamma;
        symmetric_ = true;
        if (!(A_ > 0.0)) throw DomainError("Gaussian model needs A > 0");
        return;
    }
    if (const auto* s = std::get_if<Stable>(&model.spec)) {
        kind_ = Kind::Stable;
        alpha_ = s->alpha;
        beta_ = s->beta;
        scale_ = s->scale;
        drift_ = model.gamma;
        symmetric_ = beta_ == 0.0;
        return;
    }
    if (const auto* c = std::get_if<CompoundPoisson>(&model.spec)) {
        kind_ = Kind::CompoundPoisson;
        mass_ = c->mass;
        shape_ = c->shape;
        rate_ = c->rate;
        auto f = c->density;
        double m0 = quad::endpoint_singular([&](double y) { return y * f(y); }, 0.0, 1.0) -
                    quad::endpoint_singular([&](double y) { return y * f(-y); }, 0.0, 1.0);
        drift_ = model.gamma - m0;
        if (shape_ == "laplace" || shape_ == "gaussian") {
            symmetric_ = true;
        } else {
            symmetric_ = symmetric_density(f);
            // Tabulated CDF over [-L, L]: geometric cells near 0, uniform beyond.
            double L = 1.0;
            while (L < 1e4 && (f(L) + f(-L)) * L > 1e-13 * mass_) L *= 2.0;
            std::vector<double> pos;
            for (int i = 0; i <= 400; ++i) pos.push_back(1e-10 * std::pow(std::min(1.0, L) / 1e-10, i / 400.0));
            if (L > 1.0)
                for (int i = 1; i <= 4000; ++i) pos.push_back(1.0 + (L - 1.0) * i / 4000.0);
            std::vector<double> ys;
            for (auto it = pos.rbegin(); it != pos.rend(); ++it) ys.push_back(-*it);
            ys.push_back(0.0);
            ys.insert(ys.end(), pos.begin(), pos.end());
            cdf_y_ = ys;
            cdf_p_.assign(ys.size(), 0.0);
            for (std::size_t i = 1; i < ys.size(); ++i) {
                double lo = ys[i - 1], hi = ys[i];
                double m = (lo == 0.0 || hi == 0.0) ? quad::endpoint_singular(f, lo, hi, 1e-10)
                                                    : quad::fixed(f, lo, hi, 8);
                cdf_p_[i] = cdf_p_[i - 1] + m;
            }
        }
        return;
    }
    if (const auto* v = std::get_if<VarianceGamma>(&model.spec)) {
        kind_ = Kind::VarianceGamma;
        c1_ = v->c1;
        c2_ = v->c2;
        G_ = v->G;
        M_ = v->M;
        double m0 = c2_ * -std::expm1(-M_) / M_ - c1_ * -std::expm1(-G_) / G_;
        drift_ = model.gamma - m0;
        symmetric_ = c1_ == c2_ && G_ == M_;
        return;
    }
    throw UnsupportedError("no path sampler for model '" + model.kind() +
                           "'; use the density-free spectral route or an oracle instead");
}

double IncrementSampler::jumps(double dt, PathRng& rng) const {
    switch (kind_) {
        case Kind::Gaussian:
            return 0.0;
        case Kind::Stable: {
            double sigma = std::pow(scale_ * dt, 1.0 / alpha_);
            double V = kPi * (rng.uniform() - 0.5);
            double W = rng.exponential();
            if (alpha_ == 1.0) {
                double h = kPi / 2.0 + beta_ * V;
                double X = (2.0 / kPi) * (h * std::tan(V) - beta_ * std::log((kPi / 2.0) * W * std::cos(V) / h));
                return sigma * X + (2.0 / kPi) * beta_ * sigma * std::log(sigma);
            }
            double tq = beta_ * std::tan(kPi * alpha_ / 2.0);
            double B = std::atan(tq) / alpha_;
            double S = std::pow(1.0 + tq * tq, 1.0 / (2.0 * alpha_));
            double X = S * std::sin(alpha_ * (V + B)) / std::pow(std::cos(V), 1.0 / alpha_) *
                       std::pow(std::cos(V - alpha_ * (V + B)) / W, (1.0 - alpha_) / alpha_);
            return sigma * X;
        }
        case Kind::CompoundPoisson: {
            double mu = mass_ * dt;
            long k = 0;
            if (mu < 30.0) {
                double p = std::exp(-mu), c = p, u = rng.uniform();
                while (u > c && k < 1000) {
                    ++k;
                    p *= mu / k;
                    c += p;
                }
            } else {
                std::poisson_distribution<long> pd(mu);
                k = pd(rng);
            }
            double s = 0.0;
            for (long i = 0; i < k; ++i) {
                if (shape_ == "laplace") {
                    double m = rng.exponential() / rate_;
                    s += rng.uniform() < 0.5 ? -m : m;
                } else if (shape_ == "gaussian") {
                    s += rate_ * rng.normal();
                } else {
                    double u = rng.uniform() * cdf_p_.back();
                    auto it = std::upper_bound(cdf_p_.begin(), cdf_p_.end(), u);
                    std::size_t j = std::clamp<std::size_t>(it - cdf_p_.begin(), 1, cdf_p_.size() - 1);
                    double dp = cdf_p_[j] - cdf_p_[j - 1];
                    double fr = dp > 0 ? (u - cdf_p_[j - 1]) / dp : 0.5;
                    s += cdf_y_[j - 1] + fr * (cdf_y_[j] - cdf_y_[j - 1]);
                }
            }
            return s;
        }
        case Kind::VarianceGamma: {
            std::gamma_distribution<double> up(c2_ * dt, 1.0 / M_), down(c1_ * dt, 1.0 / G_);
            return up(rng) - down(rng);
        }
    }
    return 0.0;
}

double IncrementSampler::sample(double dt, PathRng& rng) const {
    double x = drift_ * dt + jumps(dt, rng);
    if (A_ > 0.0) x += std::sqrt(A_ * dt) * rng.normal();
    return x;
}

double sample_increment(const LevyModel& model, double dt, PathRng& rng) {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    return IncrementSampler(model).sample(dt, rng);
}

// ---- estimators ------------------------------------------------------------

double resolve_budget(double configured) {
    if (configured > 0.0) return configured;
    if (const char* env = std::getenv("LEVY_EXIT_BUDGET")) {
        char* end = nullptr;
        double v = std::strtod(env, &end);
        if (end != env && v > 0.0) return v;
    }
    return 4e9;
}

namespace {

struct Region {
    std::vector<Interval> intervals;  ///< ends may be infinite
    std::optional<Interval> final_set;

    int find(double x) const {
        for (std::size_t i = 0; i < intervals.size(); ++i)
            if (x > intervals[i].lo && x < intervals[i].hi) return static_cast<int>(i);
        return -1;
    }
};

double bridge_survival(const Interval& I, double x0, double x1, double var) {
    double s = 1.0;
    if (std::isfinite(I.hi)) s *= -std::expm1(-2.0 * (I.hi - x0) * (I.hi - x1) / var);
    if (std::isfinite(I.lo)) s *= -std::expm1(-2.0 * (x0 - I.lo) * (x1 - I.lo) / var);
    return s;
}

std::vector<MCEstimate> run(const LevyModel& model, const Region& region, const std::vector<double>& times,
                            const SimConfig& cfg) {
    if (times.empty()) throw DomainError("no time points");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] > 0.0)) throw DomainError("t must be positive");
        if (k > 0 && !(times[k] > times[k - 1])) throw DomainError("time points must increase");
    }
    if (!(cfg.dt > 0.0)) throw DomainError("dt must be positive");
    if (cfg.n_paths < 1) throw DomainError("n_paths must be at least 1");
    const IncrementSampler sampler(model);
    if (cfg.antithetic && !sampler.symmetric())
        throw UnsupportedError("antithetic pairs need a symmetric jump law");

    // The step is fitted to the last time; earlier times use the nearest step boundary.
    const double t_end = times.back();
    const std::int64_t steps = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(t_end / cfg.dt - 1e-9)));
    const double dt = t_end / static_cast<double>(steps);
    const std::size_t nk = times.size();
    std::vector<std::int64_t> check(nk);
    for (std::size_t k = 0; k < nk; ++k)
        check[k] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::llround(times[k] / dt)), 1, steps);

    const bool anti = cfg.antithetic;
    const bool bridge = cfg.bridge_correction && sampler.pure_gaussian();
    std::int64_t units = anti ? (cfg.n_paths + 1) / 2 : cfg.n_paths;
    const double per_unit = static_cast<double>(steps) * (anti ? 2.0 : 1.0);
    const double budget = resolve_budget(cfg.budget);
    bool truncated = false;
    if (static_cast<double>(units) * per_unit > budget) {
        units = static_cast<std::int64_t>(std::floor(budget / per_unit));
        truncated = true;
    }

    const double var = sampler.A() * dt;
    const double centre = sampler.drift() * dt;
    const int start = region.find(cfg.x0);

    // One unit: a single path, or an antithetic pair sharing the draws.
    auto unit = [&](std::int64_t idx, std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        if (start < 0) return;
        PathRng rng(cfg.seed, static_cast<std::uint64_t>(idx));
        const int m = anti ? 2 : 1;
        double x[2] = {cfg.x0, cfg.x0}, w[2] = {1.0, 1.0};
        int cur[2] = {start, start};
        bool alive[2] = {true, anti};
        std::size_t k = 0;
        for (std::int64_t s = 1; s <= steps && (alive[0] || alive[1]); ++s) {
            double dx = sampler.sample(dt, rng);
            for (int p = 0; p < m; ++p) {
                if (!alive[p]) continue;
                double step = p == 0 ? dx : 2.0 * centre - dx;
                double xn = x[p] + step;
                int in = region.find(xn);
                // Continuous paths cannot change component without leaving.
                if (in < 0 || (bridge && in != cur[p])) {
                    alive[p] = false;
                    w[p] = 0.0;
                    continue;
                }
                if (bridge) w[p] *= bridge_survival(region.intervals[in], x[p], xn, var);
                x[p] = xn;
                cur[p] = in;
            }
            for (; k < nk && check[k] == s; ++k) {
                double v = 0.0;
                for (int p = 0; p < m; ++p)
                    if (alive[p] && (!region.final_set || region.final_set->contains(x[p]))) v += w[p];
                out[k] = v / m;
            }
        }
    };

    const std::int64_t n_blocks = (units + kBlock - 1) / kBlock;
    std::vector<double> bsum(n_blocks * nk, 0.0), bsq(n_blocks * nk, 0.0);
    std::atomic<std::int64_t> next{0};
    auto worker = [&]() {
        std::vector<double> out(nk);
        std::vector<Neumaier> s(nk), q(nk);
        for (std::int64_t b = next++; b < n_blocks; b = next++) {
            std::fill(s.begin(), s.end(), Neumaier{});
            std::fill(q.begin(), q.end(), Neumaier{});
            std::int64_t end = std::min(units, (b + 1) * kBlock);
            for (std::int64_t i = b * kBlock; i < end; ++i) {
                unit(i, out);
                for (std::size_t k = 0; k < nk; ++k) {
                    s[k].add(out[k]);
                    q[k].add(out[k] * out[k]);
                }
            }
            for (std::size_t k = 0; k < nk; ++k) {
                bsum[b * nk + k] = s[k].value();
                bsq[b * nk + k] = q[k].value();
            }
        }
    };
    int nt = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    nt = static_cast<int>(std::min<std::int64_t>(nt, std::max<std::int64_t>(1, n_blocks)));
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<MCEstimate> result(nk);
    for (std::size_t k = 0; k < nk; ++k) {
        Neumaier S, Q;
        for (std::int64_t b = 0; b < n_blocks; ++b) {
            S.add(bsum[b * nk + k]);
            Q.add(bsq[b * nk + k]);
        }
        MCEstimate& est = result[k];
        est.dt = dt;
        est.steps = check[k];
        est.bridge = bridge;
        if (region.intervals.size() > 1) est.warnings.push_back("multi-interval domain: experimental");
        if (std::abs(check[k] * dt - times[k]) > 1e-9 * times[k])
            est.warnings.push_back("time rounded to the step grid: " + std::to_string(check[k] * dt));
        est.n_effective = units;
        est.n_paths = anti ? 2 * units : units;
        if (units > 0) {
            const double n = static_cast<double>(units);
            est.p_hat = std::clamp(S.value() / n, 0.0, 1.0);
            if (!bridge && !anti) {
                est.stderr_ = std::sqrt(est.p_hat * (1.0 - est.p_hat) / n);
            } else if (units > 1) {
                double v = std::max(0.0, (Q.value() - n * est.p_hat * est.p_hat) / (n - 1.0));
                est.stderr_ = std::sqrt(v / n);
            }
        }
        est.ci_lo = std::max(0.0, est.p_hat - 1.96 * est.stderr_);
        est.ci_hi = std::min(1.0, est.p_hat + 1.96 * est.stderr_);
        if (truncated) est.warnings.push_back("work budget reached");
    }
    if (truncated)
        throw BudgetExceeded("Monte Carlo budget of " + std::to_string(budget) + " steps exceeded; " +
                                 std::to_string(units) + " units completed",
                             result.back());
    return result;
}

}  // namespace

MCEstimate estimate_survival(const LevyModel& model, const Domain& domain, double t, const SimConfig& cfg) {
    domain.validate();
    Region r;
    r.intervals = domain.intervals;
    return run(model, r, {t}, cfg).front();
}

std::vector<MCEstimate> estimate_survival_curve(const LevyModel& model, const Domain& domain,
                                                const std::vector<double>& times, const SimConfig& cfg) {
    domain.validate();
    Region r;
    r.intervals = domain.intervals;
    return run(model, r, times, cfg);
}

MCEstimate estimate_conditional(const LevyModel& model, const Domain& domain, const Interval& sub, double t,
                                const SimConfig& cfg) {
    domain.validate();
    Region r;
    r.intervals = domain.intervals;
    r.final_set = sub;
    return run(model, r, {t}, cfg).front();
}

MCEstimate estimate_hitting_survival(const LevyModel& model, double a, double t, const SimConfig& cfg) {
    if (!(a > cfg.x0)) throw DomainError("barrier must lie above the starting point");
    Region r;
    r.intervals = {Interval{-kInf, a}};
    return run(model, r, {t}, cfg).front();
}

std::vector<MCEstimate> dt_ladder(const LevyModel& model, const Domain& domain, double t, const SimConfig& cfg,
                                  int levels) {
    std::vector<MCEstimate> out;
    SimConfig c = cfg;
    for (int k = 0; k < levels; ++k) {
        out.push_back(estimate_survival(model, domain, t, c));
        c.dt /= 2.0;
    }
    return out;
}

EcfCheck ecf_check(const LevyModel& model, double dt, double z, std::int64_t n, std::uint64_t seed) {
    if (n < 2) throw DomainError("ecf check needs at least two samples");
    IncrementSampler sampler(model);
    PathRng rng(seed, 0);
    Neumaier c, s, cc, ss;
    for (std::int64_t i = 0; i < n; ++i) {
        double x = sampler.sample(dt, rng);
        double cv = std::cos(z * x), sv = std::sin(z * x);
        c.add(cv);
        s.add(sv);
        cc.add(cv * cv);
        ss.add(sv * sv);
    }
    const double N = static_cast<double>(n);
    EcfCheck r;
    r.z = z;
    r.empirical = cplx(c.value() / N, s.value() / N);
    r.expected = std::exp(-dt * characteristic_exponent(model, z));
    r.stderr_re = std::sqrt(std::max(0.0, cc.value() / N - std::norm(r.empirical.real())) / N);
    r.stderr_im = std::sqrt(std::max(0.0, ss.value() / N - std::norm(r.empirical.imag())) / N);
    double zr = std::abs(r.empirical.real() - r.expected.real()) / std::max(r.stderr_re, 1e-300);
    double zi = std::abs(r.empirical.imag() - r.expected.imag()) / std::max(r.stderr_im, 1e-300);
    if (r.stderr_im == 0.0 && r.empirical.imag() == r.expected.imag()) zi = 0.0;
    r.z_score = std::max(zr, zi);
    return r;
}

nlohmann::json to_json(const MCEstimate& e) {
    return {{"p_hat", e.p_hat},
            {"stderr", e.stderr_},
            {"ci95", {e.ci_lo, e.ci_hi}},
            {"n_paths", e.n_paths},
            {"n_effective", e.n_effective},
            {"dt", e.dt},
            {"steps", e.steps},
            {"bridge", e.bridge},
            {"warnings", e.warnings}};
}

nlohmann::json result_json(const MCEstimate& e, const LevyModel& model, const Domain& domain, const SimConfig& cfg) {
    nlohmann::json j = to_json(e);
    j["seed"] = cfg.seed;
    j["model"] = model_to_json(model);
    nlohmann::json d = nlohmann::json::array();
    for (const auto& I : domain.intervals) d.push_back({I.lo, I.hi});
    j["domain"] = d;
    j["x0"] = cfg.x0;
    j["antithetic"] = cfg.antithetic;
    return j;
}

}  // namespace levy::mc

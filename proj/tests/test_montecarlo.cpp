#include <cmath>
#include <numbers>

#include "doctest.h"
#include "levy/errors.hpp"
#include "levy/montecarlo.hpp"
#include "levy/wiener.hpp"

using namespace levy;
using namespace levy::mc;

namespace {

SimConfig config(std::int64_t paths, double dt, std::uint64_t seed = 1) {
    SimConfig c;
    c.n_paths = paths;
    c.dt = dt;
    c.seed = seed;
    c.threads = 1;
    return c;
}

}  // namespace

TEST_CASE("rng") {
    PathRng a(5, 0), b(5, 0), c(5, 1);
    CHECK(a() == b());
    CHECK(a() != c());
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    bool open = true;
    for (int i = 0; i < n; ++i) {
        double u = a.uniform();
        open = open && u > 0.0 && u < 1.0;
        double z = a.normal();
        s += z;
        s2 += z * z;
    }
    CHECK(open);
    CHECK(std::abs(s / n) < 4 / std::sqrt(n));
    CHECK(std::abs(s2 / n - 1) < 4 * std::sqrt(2.0 / n));
}

TEST_CASE("increments match the characteristic function") {
    std::vector<LevyModel> models = {stable_model(1.5, 0.0), stable_model(1.5, 0.6), stable_model(1.0, 0.5),
                                     stable_model(0.7, -0.4), stable_model(0.5, 1.0),
                                     variance_gamma_model({1.0, 1.5, 2.0, 3.0}), laplace_compound_poisson_model(1.0, 1.0, 0.3),
                                     gaussian_model(0.5, 0.2)};
    for (const auto& m : models)
        for (double z : {0.5, 1.0, 3.0}) {
            EcfCheck e = ecf_check(m, 1.0, z, 100000, 3);
            CAPTURE(m.kind());
            CAPTURE(z);
            CHECK(e.z_score < 4.0);
        }
}

TEST_CASE("increment moments") {
    PathRng rng(2, 0);
    IncrementSampler g(gaussian_model(0.5, 0.2));
    CHECK(g.pure_gaussian());
    IncrementSampler cp(laplace_compound_poisson_model(1.0, 1.0));
    CHECK(cp.symmetric());
    const int n = 200000;
    const double dt = 0.1;
    double sg = 0.0, sg2 = 0.0, sc2 = 0.0;
    int zeros = 0;
    for (int i = 0; i < n; ++i) {
        double x = g.sample(dt, rng);
        sg += x;
        sg2 += x * x;
        double y = cp.sample(dt, rng);
        sc2 += y * y;
        if (y == 0.0) ++zeros;
    }
    double mean = sg / n;
    CHECK(std::abs(mean - 0.02) < 4 * std::sqrt(0.05 / n));
    CHECK(sg2 / n - mean * mean == doctest::Approx(0.05).epsilon(0.02));
    // Jump rate 2 and second moment 4 per unit time.
    CHECK(sc2 / n == doctest::Approx(0.4).epsilon(0.03));
    CHECK(static_cast<double>(zeros) / n == doctest::Approx(std::exp(-0.2)).epsilon(0.01));
}

TEST_CASE("stable increment density") {
    LevyModel m = stable_model(1.5, 0.3);
    PathRng rng(7, 0);
    IncrementSampler s(m);
    const int n = 400000;
    const double h = 0.05;
    int hits = 0;
    for (int i = 0; i < n; ++i)
        if (std::abs(s.sample(2.0, rng) - 0.7) < h) ++hits;
    double p = static_cast<double>(hits) / n;
    double est = p / (2 * h), sd = std::sqrt(p * (1 - p) / n) / (2 * h);
    CHECK(std::abs(est - transition_density(m, 0.7, 2.0)) < 4 * sd + 1e-3);
}

TEST_CASE("Gaussian survival against the oracle") {
    LevyModel m = gaussian_model(1.0);
    Domain d = Domain::single(-1.0, 1.0);
    MCEstimate e = estimate_survival(m, d, 1.0, config(200000, 1e-2));
    CHECK(e.bridge);
    CHECK(std::abs(e.p_hat - wiener::p2(1.0, 1.0, 1.0)) < 4 * e.stderr_);
    CHECK(e.ci_lo < e.p_hat);
    CHECK(e.ci_hi > e.p_hat);

    MCEstimate h = estimate_hitting_survival(m, 1.0, 1.0, config(200000, 1e-2));
    CHECK(std::abs(h.p_hat - wiener::first_hitting_survival(1.0, 1.0)) < 4 * h.stderr_);
    CHECK(e.p_hat <= h.p_hat);

    SimConfig nb = config(100000, 1e-2);
    nb.bridge_correction = false;
    MCEstimate raw = estimate_survival(m, d, 1.0, nb);
    CHECK_FALSE(raw.bridge);
    CHECK(raw.p_hat > wiener::p2(1.0, 1.0, 1.0));
}

TEST_CASE("basic path properties") {
    LevyModel cauchy = kac_cauchy_model();
    Domain d = Domain::single(-1.0, 1.0);
    MCEstimate one = estimate_survival(cauchy, d, 1e-3, config(20000, 1e-3));
    CHECK(one.steps == 1);
    CHECK(one.p_hat > 0.99);

    auto curve = estimate_survival_curve(cauchy, d, {0.25, 0.5, 1.0, 2.0}, config(20000, 1e-2));
    REQUIRE(curve.size() == 4);
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].p_hat <= curve[i - 1].p_hat);

    MCEstimate all = estimate_survival(cauchy, d, 1.0, config(20000, 1e-2));
    MCEstimate part = estimate_conditional(cauchy, d, {-0.5, 0.5}, 1.0, config(20000, 1e-2));
    CHECK(part.p_hat <= all.p_hat);
    CHECK(all.p_hat == curve[2].p_hat);

    // Scaling: survival in [-2, 2] up to t = 2 is survival in [-1, 1] up to t = 1.
    MCEstimate big = estimate_survival(cauchy, Domain::single(-2.0, 2.0), 2.0, config(40000, 2e-2, 9));
    MCEstimate unit = estimate_survival(cauchy, d, 1.0, config(40000, 1e-2, 10));
    CHECK(std::abs(big.p_hat - unit.p_hat) < 4 * std::hypot(big.stderr_, unit.stderr_));

    SimConfig anti = config(20000, 1e-2);
    anti.antithetic = true;
    MCEstimate a = estimate_survival(cauchy, d, 1.0, anti);
    CHECK(std::abs(a.p_hat - all.p_hat) < 4 * std::hypot(a.stderr_, all.stderr_));
    CHECK_THROWS_AS(estimate_survival(stable_model(1.5, 0.5), d, 1.0, anti), UnsupportedError);
}

TEST_CASE("determinism and errors") {
    LevyModel m = stable_model(1.5, 0.2);
    Domain d = Domain::single(-1.0, 2.0);
    SimConfig c1 = config(30000, 1e-2, 4), c3 = c1;
    c3.threads = 3;
    MCEstimate e1 = estimate_survival(m, d, 1.0, c1), e3 = estimate_survival(m, d, 1.0, c3);
    CHECK(e1.p_hat == e3.p_hat);
    CHECK(e1.stderr_ == e3.stderr_);

    SimConfig tight = config(100000, 1e-3);
    tight.budget = 1e6;
    CHECK_THROWS_AS(estimate_survival(m, d, 1.0, tight), BudgetExceeded);
    CHECK_THROWS_AS(estimate_survival(nig_model(1.0, 0.2), d, 1.0, config(100, 1e-2)), UnsupportedError);
    CHECK(resolve_budget(123.0) == 123.0);

    auto ladder = dt_ladder(kac_cauchy_model(), Domain::single(-1.0, 1.0), 1.0, config(10000, 4e-2), 3);
    REQUIRE(ladder.size() == 3);
    CHECK(ladder[1].steps == 2 * ladder[0].steps);
    CHECK(ladder[2].dt == doctest::Approx(1e-2));
    // Discrete monitoring misses excursions, so finer steps survive less.
    CHECK(ladder[2].p_hat <= ladder[0].p_hat);

    MCEstimate small = estimate_survival(m, d, 1.0, config(10000, 1e-2, 5));
    MCEstimate large = estimate_survival(m, d, 1.0, config(40000, 1e-2, 5));
    CHECK(large.stderr_ / small.stderr_ == doctest::Approx(0.5).epsilon(0.1));

    auto j = result_json(small, m, d, config(10000, 1e-2, 5));
    CHECK(j.contains("p_hat"));
    CHECK(to_json(small)["n_paths"].get<std::int64_t>() == 10000);
}

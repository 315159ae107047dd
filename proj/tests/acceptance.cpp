// Acceptance checks. Each criterion prints one "criterion N PASS|FAIL ..." line; the exit code
// is nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "levy/kernels.hpp"
#include "levy/montecarlo.hpp"
#include "levy/quadrature.hpp"
#include "levy/quasipotential.hpp"
#include "levy/spectral.hpp"
#include "levy/wiener.hpp"

using namespace levy;

namespace {

constexpr double pi = std::numbers::pi;

// Tolerances and budgets.
constexpr double kTol1 = 1e-6, kTime1 = 5.0;
constexpr double kTol2 = 1e-4;
constexpr double kTol3 = 1e-9;
constexpr double kTol4 = 1e-10;
constexpr double kTol5 = 1e-2, kTime5 = 60.0;
constexpr double kShrink6 = 4.0, kUnc6 = 1e-4;
constexpr double kSigma7 = 3.0, kTime7 = 600.0;
constexpr double kTolScaling8 = 1e-5, kTolNeg8 = 1e-12, kTolBoundary8 = 1e-10, kTolShift8 = 1e-12;
constexpr double kTol9 = 1e-3, kInterior9 = 0.99;
constexpr double kTolN10 = 1e-6, kTolQ10 = 1e-6;
constexpr double kTol11 = 1e-4;
constexpr double kTime12 = 30.0;

// Golden Cauchy lambda_1 on [-1, 1] for exponent (2/pi)|z|, from the n = 128/256/512 study.
constexpr double kCauchyLambda1 = 1.3567384348;
// Ground-state eigenvalue of the Cauchy process with exponent |z| on (-1, 1) from the literature.
constexpr double kCauchyUnitExponentMu1 = 1.1577738836977;

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double lambda1(const QuasiPotentialKernel& k, int n) { return eigensystem(assemble(k, n), 1).eigenvalues[0].real(); }

Outcome c1() {
    Timer tm;
    SpectralDecomposition d = eigensystem(assemble(make_wiener_kernel(1.0, 1.0), 256), 5);
    double worst = 0.0;
    for (int k = 1; k <= 5; ++k) {
        double exact = 8.0 / (k * k * pi * pi);
        worst = std::max(worst, std::abs(d.eigenvalues[k - 1].real() / exact - 1));
    }
    double s = tm.seconds();
    return {worst <= kTol1 && s < kTime1, fmt("max rel err %.2e (tol %.0e), %.2f s (limit %.0f s)", worst, kTol1, s, kTime1)};
}

Outcome c2() {
    SpectralDecomposition d = eigensystem(assemble(make_wiener_kernel(1.0, 1.0), 256));
    double worst = 0.0;
    for (double t : {0.5, 1.0, 3.0, 10.0}) worst = std::max(worst, std::abs(survival_series(d, t) - wiener::p2_series(1, 1, t)));
    return {worst <= kTol2, fmt("max abs err %.2e over t in {0.5,1,3,10} (tol %.0e)", worst, kTol2)};
}

Outcome c3() {
    double worst = 0.0;
    for (double a : {0.5, 1.0, 2.0})
        for (double b : {0.5, 1.0, 2.0})
            for (double t : {0.1, 1.0, 5.0})
                worst = std::max(worst, std::abs(wiener::p2_series(a, b, t) - wiener::p2_resummed(a, b, t)));
    return {worst <= kTol3, fmt("max abs diff %.2e on 27 points (tol %.0e)", worst, kTol3)};
}

Outcome c4() {
    double lhs = wiener::p2_resummed(1.0, 50.0, 1.0);
    double exact = std::erf(1.0 / std::sqrt(2.0));  // 2 Phi(1) - 1
    double e1 = std::abs(lhs - wiener::first_hitting_survival(1.0, 1.0)), e2 = std::abs(lhs - exact);
    double worst = std::max(e1, e2);
    return {worst <= kTol4, fmt("p=%.12f, err vs hitting %.1e, vs 2Phi(1)-1 %.1e (tol %.0e)", lhs, e1, e2, kTol4)};
}

Outcome c5() {
    Timer tm;
    ConstructionOptions o;
    o.n = 512;
    QuasiPotentialKernel g = general_construction(build_kernel(kac_cauchy_model()), 1.0, o);
    double cal = cauchy_kernel(1.0, 0.0, 0.3) / g(0.0, 0.3);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-0.95, 0.95);
    double worst = 0.0, raw = 0.0;
    for (int i = 0; i < 100;) {
        double x = U(rng), y = U(rng);
        if (std::abs(x - y) < 0.05) continue;
        ++i;
        double exact = cauchy_kernel(1.0, x, y);
        worst = std::max(worst, std::abs(cal * g(x, y) / exact - 1));
        raw = std::max(raw, std::abs(g(x, y) / exact - 1));
    }
    double s = tm.seconds();
    return {worst <= kTol5 && s < kTime5,
            fmt("max rel err %.2e calibrated (scale %.6f), %.2e uncalibrated (tol %.0e), %.1f s", worst, cal, raw, kTol5, s)};
}

Outcome c6() {
    QuasiPotentialKernel k = make_cauchy_kernel(1.0, 1.0);
    double l128 = lambda1(k, 128), l256 = lambda1(k, 256), l512 = lambda1(k, 512);
    double d1 = l256 - l128, d2 = l512 - l256;
    double ratio = d1 / d2;
    double extrap = l512 + d2 / (ratio - 1);
    double unc = std::abs(d2 / (ratio - 1));
    double ref = pi / (2 * kCauchyUnitExponentMu1);
    bool ok = ratio >= kShrink6 && unc <= kUnc6 && std::abs(extrap - kCauchyLambda1) <= kUnc6;
    return {ok, fmt("lambda1 %.10f (+- %.1e); shrink %.2f (>= %.0f); golden %.10f; literature %.10f", extrap, unc, ratio,
                    kShrink6, kCauchyLambda1, ref)};
}

Outcome c7() {
    Timer tm;
    mc::SimConfig cfg;
    cfg.n_paths = 1000000;
    cfg.dt = 1e-2;
    cfg.seed = 2024;
    Domain d = Domain::single(-1.0, 1.0);
    mc::MCEstimate g = mc::estimate_survival(gaussian_model(1.0), d, 1.0, cfg);
    double oracle = wiener::p2_resummed(1.0, 1.0, 1.0);
    bool gauss_ok = std::abs(g.p_hat - oracle) <= kSigma7 * g.stderr_;

    double spectral = survival_series(eigensystem(assemble(make_cauchy_kernel(1.0, 1.0), 256)), 1.0);
    double lo = 1.0, hi = 0.0;
    std::string ladder;
    mc::MCEstimate finest;
    for (double dt : {1e-2, 1e-3, 1e-4}) {
        mc::SimConfig c;
        c.n_paths = 100000;
        c.dt = dt;
        c.seed = 77;
        finest = mc::estimate_survival(kac_cauchy_model(), d, 1.0, c);
        lo = std::min(lo, finest.p_hat - kSigma7 * finest.stderr_);
        hi = std::max(hi, finest.p_hat + kSigma7 * finest.stderr_);
        ladder += fmt(" %.5f", finest.p_hat);
    }
    bool bracket = spectral >= lo && spectral <= hi;
    bool fine_ok = std::abs(finest.p_hat - spectral) <= kSigma7 * finest.stderr_;
    double s = tm.seconds();
    return {gauss_ok && bracket && fine_ok && s < kTime7,
            fmt("gauss %.6f vs %.6f (%.2f se); cauchy ladder%s se %.1e vs spectral %.6f, band [%.5f, %.5f], finest %.2f se; "
                "%.0f s",
                g.p_hat, oracle, (g.p_hat - oracle) / g.stderr_, ladder.c_str(), finest.stderr_, spectral, lo, hi,
                (finest.p_hat - spectral) / finest.stderr_, s)};
}

Outcome c8() {
    struct Case {
        std::string name;
        std::function<QuasiPotentialKernel(double, double)> make;  // (b, a)
        double alpha;
    };
    std::vector<Case> cases = {
        {"wiener", [](double b, double a) { return make_wiener_kernel(b, a); }, 2.0},
        {"cauchy", [](double b, double a) { return make_cauchy_kernel(b, a); }, 1.0},
        {"stable1.5", [](double b, double a) { return make_stable_case1_kernel(1.5, 0.0, b, a); }, 1.5},
        {"onesided1.5", [](double b, double a) { return make_onesided_kernel(1.5, 1.0, b, a); }, 1.5},
    };
    bool ok = true;
    std::string detail;
    std::mt19937_64 rng(8);
    for (const auto& c : cases) {
        QuasiPotentialKernel k = c.make(1.0, 1.0);
        double mn = 0.0, bd = 0.0;
        const int m = 41;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double x = -1.0 + 2.0 * i / (m - 1), y = -1.0 + 2.0 * j / (m - 1);
                if (i == j && k.diagonal != DiagonalSingularity::None) continue;
                double v = k(x, y);
                mn = std::min(mn, v);
                if (i == 0 || j == 0 || i == m - 1 || j == m - 1) bd = std::max(bd, std::abs(v));
            }
        QuasiPotentialKernel skew = c.make(3.0, 1.0), sym = c.make(2.0, 2.0);
        std::uniform_real_distribution<double> U(-3.0, 1.0);
        double shift = 0.0;
        for (int i = 0; i < 20; ++i) {
            double x = U(rng), y = U(rng);
            double ref = sym(x + 1.0, y + 1.0);
            shift = std::max(shift, std::abs(skew(x, y) - ref) / std::max(1.0, std::abs(ref)));
        }
        double l1 = lambda1(k, 128), l2 = lambda1(c.make(2.0, 2.0), 128);
        double scal = std::abs(l2 / stable_scaling(l1, 2.0, c.alpha) - 1);
        bool here = mn >= -kTolNeg8 && bd <= kTolBoundary8 && shift <= kTolShift8 && scal <= kTolScaling8;
        ok = ok && here;
        detail += fmt(" %s[min %.1e bd %.1e shift %.1e scale %.1e]", c.name.c_str(), mn, bd, shift, scal);
    }
    return {ok, detail.substr(1)};
}

Outcome c9() {
    const int n = 401;
    std::vector<std::function<double(double)>> fs = {[](double x) { return std::pow(1 - x * x, 2); },
                                                     [](double x) { return x * std::pow(1 - x * x, 2); },
                                                     [](double x) { return std::exp(x) * std::pow(1 - x * x, 3); }};
    std::vector<double> grid(n);
    for (int j = 0; j < n; ++j) grid[j] = -std::cos(pi * j / (n - 1));
    grid.front() = -1.0;
    grid.back() = 1.0;
    bool ok = true;
    std::string detail;
    for (int which = 0; which < 2; ++which) {
        QuasiPotentialKernel k = which == 0 ? make_wiener_kernel(1.0, 1.0) : make_cauchy_kernel(1.0, 1.0);
        LevyModel m = which == 0 ? gaussian_model(1.0) : kac_cauchy_model();
        double worst = 0.0, worst_all = 0.0;
        for (const auto& f : fs) {
            SampledFunction bf;
            bf.grid = grid;
            bf.values.assign(n, 0.0);
            bf.boundary = BoundaryClass::General;
            for (int j = 1; j + 1 < n; ++j) {
                double x = grid[j];
                bf.values[j] = quad::split([&](double y) { return y == x ? 0.0 : k(x, y) * f(y); }, -1.0, 1.0, {x}, 1e-12);
            }
            SampledFunction l = apply_generator(m, bf, GeneratorPath::Direct);
            for (int j = 1; j + 1 < n; ++j) {
                double r = std::abs(-l.values[j] - f(grid[j]));
                worst_all = std::max(worst_all, r);
                if (std::abs(grid[j]) <= kInterior9) worst = std::max(worst, r);
            }
        }
        ok = ok && worst < kTol9;
        detail += fmt(" %s %.2e (|x|<=%.2f), %.2e (all nodes)", which == 0 ? "wiener" : "cauchy", worst, kInterior9, worst_all);
    }
    return {ok, detail.substr(1) + fmt(" (tol %.0e)", kTol9)};
}

Outcome c10() {
    LevyModel m = laplace_compound_poisson_model(1.0, 1.0);
    CompoundPoissonPotential q(m);
    double nerr = 0.0;
    for (double x = -8.0; x <= 8.0; x += 0.01)
        nerr = std::max(nerr, std::abs(q.n(x) + std::exp(-std::sqrt(2.0) * std::abs(x)) / (2 * std::sqrt(2.0))));

    SampledFunction f;
    f.grid.resize(81);
    for (int i = 0; i < 81; ++i) f.grid[i] = -1.0 + 2.0 * i / 80;
    for (double x : f.grid) f.values.push_back(std::pow(1 - x * x, 2));
    auto qf = [&](double x) { return q.apply(f, x); };
    const double M = q.mass();
    double gen = 0.0, plus = 0.0;
    for (double x : {-0.75, -0.4, 0.0, 0.3, 0.8}) {
        double conv = quad::split([&](double y) { return std::exp(-std::abs(y - x)) * qf(y); }, x - 30.0, x + 30.0,
                                  {-1.0, 1.0}, 1e-10);
        double fx = std::pow(1 - x * x, 2);
        gen = std::max(gen, std::abs(M * qf(x) - conv - fx));   // -L Q f - f
        plus = std::max(plus, std::abs(M * qf(x) + conv - fx));  // (M + nu *) Q f - f
    }
    return {nerr <= kTolN10 && gen <= kTolQ10,
            fmt("n(x) sup err %.1e (tol %.0e); -L(Qf)-f %.2e (tol %.0e); (M+nu*)Qf-f %.1e", nerr, kTolN10, gen, kTolQ10,
                plus)};
}

Outcome c11() {
    NystromSystem sys = assemble(make_wiener_kernel(1.0, 1.0), 128);
    SpectralDecomposition d = eigensystem(sys);
    double worst = 0.0;
    for (double s : {0.5, 1.0, 2.0}) {
        double lt = quad::half_infinite([&](double t) { return std::exp(-s * t) * survival_series(d, t); }, 0.0, 1e-10);
        worst = std::max(worst, std::abs(resolvent_psi(sys, s).integral - lt));
    }
    return {worst <= kTol11, fmt("max abs err %.2e over s in {0.5,1,2} (tol %.0e)", worst, kTol11)};
}

Outcome c12() {
    Timer tm;
    auto trials = random_trials(-1.0, 1.0, 129, 200, 13);
    bool ok = true;
    std::string detail;
    for (const auto& [name, m] : std::vector<std::pair<std::string, LevyModel>>{{"nig", nig_model(1.0, 0.5)},
                                                                               {"meixner", meixner_model(1.0, 0.5)}}) {
        SectorReport r = sector_diagnostics(build_kernel(m), trials, &m);
        ok = ok && r.max_abs_arg < pi / 2;
        detail += fmt("%s half-angle %.4f rad; ", name.c_str(), r.max_abs_arg);
    }
    double s = tm.seconds();
    return {ok && s < kTime12, detail + fmt("200 trials, %.2f s (limit %.0f s)", s, kTime12)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "criteria to run (default: all)")->check(CLI::Range(1, 12));
    CLI11_PARSE(app, argc, argv);
    if (selected.empty())
        for (int i = 1; i <= 12; ++i) selected.push_back(i);

    const std::map<int, std::function<Outcome()>> table = {{1, c1}, {2, c2}, {3, c3},   {4, c4},   {5, c5},   {6, c6},
                                                           {7, c7}, {8, c8}, {9, c9}, {10, c10}, {11, c11}, {12, c12}};
    int failures = 0;
    for (int i : selected) {
        Outcome o;
        try {
            o = table.at(i)();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %d %s %s\n", i, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}

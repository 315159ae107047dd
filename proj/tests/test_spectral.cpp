#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "levy/errors.hpp"
#include "levy/quadrature.hpp"
#include "levy/quasipotential.hpp"
#include "levy/spectral.hpp"
#include "levy/wiener.hpp"

using namespace levy;
constexpr double pi = std::numbers::pi;

namespace {

SpectralDecomposition decompose(const QuasiPotentialKernel& k, int n, int keep = 0) {
    return eigensystem(assemble(k, n), keep);
}

}  // namespace

TEST_CASE("assembly") {
    NystromSystem w = assemble(make_wiener_kernel(1.0, 1.0), 64);
    double wsum = 0.0, asym = 0.0;
    for (double x : w.weights) wsum += x;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-13));
    for (int i = 0; i < w.size(); ++i)
        for (int j = 0; j < w.size(); ++j) {
            double a = std::sqrt(w.weights[i] / w.weights[j]) * w.matrix(i, j);
            double b = std::sqrt(w.weights[j] / w.weights[i]) * w.matrix(j, i);
            asym = std::max(asym, std::abs(a - b));
        }
    CHECK(asym < 1e-12);

    NystromSystem c = assemble(make_cauchy_kernel(1.0, 1.0), 64);
    for (int i = 0; i < c.size(); ++i) CHECK(std::isfinite(c.matrix(i, i)));
    CHECK_THROWS(assemble(make_cauchy_kernel(1.0, 1.0), 8));

    double l64 = decompose(make_wiener_kernel(1.0, 1.0), 64, 1).eigenvalues[0].real();
    double l128 = decompose(make_wiener_kernel(1.0, 1.0), 128, 1).eigenvalues[0].real();
    CHECK(std::abs(l64 / l128 - 1) < 1e-4);
}

TEST_CASE("Wiener spectrum") {
    SpectralDecomposition d = decompose(make_wiener_kernel(1.0, 1.0), 256, 10);
    CHECK(d.symmetric);
    for (int k = 1; k <= 5; ++k) {
        cplx l = d.eigenvalues[k - 1];
        CHECK(std::abs(l.imag()) < 1e-10);
        CHECK(std::abs(l.real() / (8.0 / (k * k * pi * pi)) - 1) < 1e-6);
        CHECK(1.0 / l.real() == doctest::Approx(wiener::eigen_mu(k, 1.0, 1.0)).epsilon(1e-6));
        // Up to sign and scale the eigenfunction is the sine mode.
        double ratio = 0.0, spread = 0.0;
        for (int i = 0; i < d.system->size(); ++i) {
            double x = d.system->nodes[i];
            double s = std::sin(k * pi * (x + 1) / 2);
            if (std::abs(s) < 0.3) continue;
            double r = d.right(i, k - 1).real() / s;
            if (ratio == 0.0) ratio = r;
            spread = std::max(spread, std::abs(r / ratio - 1));
        }
        CHECK(spread < 1e-6);
    }
    double bi = 0.0;
    for (int k = 0; k < 10; ++k)
        for (int l = 0; l < 10; ++l)
            if (k != l) bi = std::max(bi, std::abs((d.left.row(k) * d.right.col(l))(0, 0)));
    CHECK(bi < 1e-8);

    auto la = leading_asymptotics(d);
    CHECK(la.lambda1 == doctest::Approx(8 / (pi * pi)).epsilon(1e-8));
    CHECK(la.c1 == doctest::Approx(4 / pi).epsilon(1e-8));

    SpectralDecomposition skew = decompose(make_wiener_kernel(3.0, 1.0), 128, 5);
    CHECK(leading_asymptotics(skew).c1 == doctest::Approx(4 / pi * std::sin(pi / 4)).epsilon(1e-6));
}

TEST_CASE("survival series") {
    SpectralDecomposition d = decompose(make_wiener_kernel(1.0, 1.0), 128);
    CHECK(survival_series(d, 3.0) == doctest::Approx(wiener::p2_series(1.0, 1.0, 3.0)).epsilon(1e-5));
    auto la = leading_asymptotics(d);
    double t = 10 * la.lambda1;
    CHECK(std::abs(survival_series(d, t) / (la.c1 * std::exp(-t / la.lambda1)) - 1) < 1e-3);
    auto one = survival_series(d, std::vector<double>{0.5, 1.0, 4.0}, 1);
    auto asym = asymptotic_survival(d, {0.5, 1.0, 4.0});
    for (int i = 0; i < 3; ++i) CHECK(one.values[i] == asym.values[i]);

    auto times = th::linspace(0.05, 6.0, 60);
    auto curve = survival_series(d, times);
    for (std::size_t i = 1; i < times.size(); ++i) CHECK(curve.values[i] <= curve.values[i - 1] + 1e-12);
    for (double v : curve.values) CHECK(v <= 1 + 1e-9);

    auto early = survival_series(d, std::vector<double>{1e-4}, 3);
    CHECK_FALSE(early.warnings.empty());

    std::ostringstream os;
    write_survival_csv(curve, os);
    CHECK(os.str().rfind("t,p,method,err\n", 0) == 0);

    auto js = spectrum_json(d, 5);
    CHECK(js["eigenvalues"].size() == 5);
    CHECK(js["lambda1"].get<double>() == doctest::Approx(8 / (pi * pi)).epsilon(1e-6));
}

TEST_CASE("conditional coefficient") {
    SpectralDecomposition d = decompose(make_wiener_kernel(1.0, 1.0), 128, 4);
    CHECK(conditional_asymptotics(d, 0.0, {-1.0, 1.0}) == doctest::Approx(leading_asymptotics(d).c1).epsilon(1e-10));
    CHECK(conditional_asymptotics(d, 0.0, {-0.5, 0.5}) == doctest::Approx(4 / pi * std::sin(pi / 4)).epsilon(1e-6));
    double prev = 0.0;
    for (double h : {0.1, 0.3, 0.5, 0.8, 1.0}) {
        double v = conditional_asymptotics(d, 0.0, {-h, h});
        CHECK(v >= prev);
        prev = v;
    }
    CHECK_THROWS_AS(conditional_asymptotics(d, 0.7, {-0.5, 0.5}), DomainError);
}

TEST_CASE("resolvent") {
    QuasiPotentialKernel k = make_wiener_kernel(1.0, 1.0);
    NystromSystem sys = assemble(k, 128);
    ResolventResult r0 = resolvent_psi(sys, 0.0);
    for (std::size_t i = 0; i < r0.psi.grid.size(); ++i)
        CHECK(r0.psi.values[i] == doctest::Approx(k(0.0, r0.psi.grid[i])).epsilon(1e-12));
    SpectralDecomposition d = eigensystem(sys);
    for (double s : {0.5, 1.0, 2.0}) {
        ResolventResult r = resolvent_psi(sys, s);
        for (double v : r.psi.values) CHECK(v >= -1e-12);
        double lt = quad::half_infinite([&](double t) { return std::exp(-s * t) * survival_series(d, t); }, 0.0, 1e-10);
        CHECK(std::abs(r.integral - lt) < 1e-4);
    }
}

TEST_CASE("scaling and regimes") {
    CHECK(stable_scaling(0.7, 1.0, 1.3) == 0.7);
    CHECK(stable_scaling(8 / (pi * pi), 3.0, 2.0) == doctest::Approx(9 * 8 / (pi * pi)));
    CHECK(stable_scaling(kac_cauchy_model(), 1.0, 2.0) == doctest::Approx(2.0));
    CHECK_THROWS(stable_scaling(variance_gamma_model({1, 1, 2, 2}), 1.0, 2.0));

    double l1 = decompose(make_cauchy_kernel(1.0, 1.0), 128, 1).eigenvalues[0].real();
    double l2 = decompose(make_cauchy_kernel(2.0, 2.0), 128, 1).eigenvalues[0].real();
    CHECK(std::abs(l2 / (2 * l1) - 1) < 1e-5);
    double s1 = decompose(make_stable_case1_kernel(1.5, 0.0, 1.0, 1.0), 96, 1).eigenvalues[0].real();
    double s2 = decompose(make_stable_case1_kernel(1.5, 0.0, 1.5, 1.5), 96, 1).eigenvalues[0].real();
    CHECK(std::abs(s2 / stable_scaling(s1, 1.5, 1.5) - 1) < 1e-5);

    CHECK(regime_classify(1.5, RegimeKind::Infinity).limit == RegimeLimit::LimitZero);
    CHECK(regime_classify(1.5, RegimeKind::Infinity).value == 0.0);
    CHECK(regime_classify(1.5, RegimeKind::Zero).value == 1.0);
    SpectralDecomposition d = decompose(make_wiener_kernel(1.0, 1.0), 64);
    auto fin = regime_classify(2.0, RegimeKind::Finite, 1.5, &d);
    CHECK(fin.limit == RegimeLimit::LimitPT);
    CHECK(fin.value == doctest::Approx(survival_series(d, 1.5)));
}

TEST_CASE("regularity report") {
    NystromSystem w = assemble(make_wiener_kernel(1.0, 1.0), 64);
    SpectralDecomposition dw = eigensystem(w);
    RegularityReport rw = regularity_report(w, dw);
    CHECK(rw.disk_ok);
    CHECK(rw.max_imag < 1e-10);
    CHECK(rw.min_phi >= -1e-12);
    CHECK(rw.max_boundary < 1e-10);
    for (auto l : dw.eigenvalues) {
        CHECK(l.real() > 0.0);
        CHECK(l.real() <= dw.eigenvalues[0].real() * (1 + 1e-12));
    }

    NystromSystem c = assemble(make_cauchy_kernel(1.0, 1.0), 64);
    SpectralDecomposition dc = eigensystem(c);
    RegularityReport rc = regularity_report(c, dc, 200);
    CHECK(rc.trials == 200);
    CHECK(rc.sector_half_angle < pi / 2);
    auto la = leading_asymptotics(dc);
    CHECK(la.lambda1 > 0.0);
    CHECK(la.c1 > 0.0);
    for (int i = 0; i < dc.system->size(); ++i) CHECK(dc.right(i, 0).real() >= -1e-10);

    NystromSystem o = assemble(make_onesided_kernel(1.5, 1.0, 1.0, 1.0), 64);
    SpectralDecomposition d_o = eigensystem(o);
    RegularityReport ro = regularity_report(o, d_o);
    CHECK(ro.conjugate_pairs);
    CHECK(ro.max_imag > 1e-6);
}

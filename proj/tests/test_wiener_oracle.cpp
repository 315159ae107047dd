#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "doctest.h"
#include "levy/wiener.hpp"

using namespace levy::wiener;
constexpr double pi = std::numbers::pi;

TEST_CASE("series at t = 3 is its leading term") {
    double lead = 4.0 / pi * std::exp(-3.0 * pi * pi / 8.0);
    CHECK(p2_series(1, 1, 3) == doctest::Approx(lead).epsilon(1e-13));
    CHECK(p2_series(1, 1, 3) == doctest::Approx(0.0314).epsilon(1e-2));
    SeriesResult r = p2_series_ex(1, 1, 3, 1e-15);
    CHECK(r.remainder_bound < 1e-15);
}

TEST_CASE("symmetric case is the alternating cosine series") {
    for (double t : {0.3, 1.0, 2.0}) {
        double s = 0.0;
        for (int m = 0; m < 60; ++m) {
            double k = 2 * m + 1;
            s += (m % 2 ? -1.0 : 1.0) * 4.0 / (k * pi) * std::exp(-t * k * k * pi * pi / 8.0);
        }
        CHECK(p2_series(1, 1, t) == doctest::Approx(s).epsilon(1e-14));
    }
}

TEST_CASE("short-time limit") {
    CHECK(p2_resummed(1, 1, 1e-4) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p2(1, 1, 1e-4) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("image series agrees with the eigenfunction series") {
    CHECK(std::abs(p2_resummed(1, 1, 1) - p2_series(1, 1, 1)) < 1e-10);
    for (double a : {0.5, 1.0, 2.0})
        for (double b : {0.5, 1.0, 2.0})
            for (double t : {0.1, 1.0, 5.0}) {
                CAPTURE(a);
                CAPTURE(b);
                CAPTURE(t);
                CHECK(std::abs(p2_resummed(a, b, t) - p2_series(a, b, t)) < 1e-9);
                double v = p2(a, b, t);
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
}

TEST_CASE("asymptotics") {
    double exact = 4.0 / pi * std::sin(pi / 2) * std::exp(-20.0 * pi * pi / 8.0);
    CHECK(p2_resummed(1, 1, 20) == doctest::Approx(exact).epsilon(1e-6));
    CHECK(p2_asymptotic(1, 1, 20) == doctest::Approx(exact).epsilon(1e-14));
    CHECK(p2_asymptotic(1, 3, 2) == doctest::Approx(4.0 / pi * std::sin(pi / 4) * std::exp(-2.0 * pi * pi / 32.0)));
}

TEST_CASE("first hitting time") {
    boost::math::normal n;
    CHECK(first_hitting_survival(1, 1) == doctest::Approx(2 * boost::math::cdf(n, 1.0) - 1).epsilon(1e-14));
    CHECK(first_hitting_survival(1, 1) == doctest::Approx(0.682689).epsilon(1e-6));
    CHECK(first_hitting_survival(1, 1e-8) == doctest::Approx(1.0));
    CHECK(first_hitting_survival(1e-9, 100.0) < 1e-9);
    CHECK(std::abs(p2_resummed(1, 50, 1) - first_hitting_survival(1, 1)) < 1e-12);
    double prev = 0.0;
    for (double b : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        double v = p2(1, b, 1);
        CHECK(v > prev);
        CHECK(v <= first_hitting_survival(1, 1) + 1e-15);
        prev = v;
    }
}

TEST_CASE("monotonicity") {
    double prev = 1.0;
    for (double t = 0.05; t < 8; t *= 1.3) {
        double v = p2(1, 1, t);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(p2(1.2, 1, 1) > p2(1, 1, 1));
    CHECK(p2(1, 1.2, 1) > p2(1, 1, 1));
}

TEST_CASE("eigen data") {
    CHECK(eigen_mu(1, 1, 1) == doctest::Approx(pi * pi / 8));
    for (int k = 1; k <= 4; ++k) {
        CHECK(std::abs(eigenfunction(k, 1, 2, -2)) < 1e-15);
        CHECK(std::abs(eigenfunction(k, 1, 2, 1)) < 1e-12);
        double s = 0.0;
        const int N = 4000;
        for (int i = 0; i < N; ++i) {
            double x = -2 + 3.0 * (i + 0.5) / N;
            s += eigenfunction(k, 1, 2, x) * eigenfunction(k, 1, 2, x) * 3.0 / N;
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
    }
}

#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "lsvcal/cost.hpp"

using namespace lsv;

TEST_CASE("coefficients pin the minimum at x_bar with zero value") {
    CostParams c4 = cost_coefficients(4.0, 1.0);
    CHECK(c4.a == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c4.b == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
    CHECK(c4.c == doctest::Approx(-8.0 / 3.0).epsilon(1e-15));

    CostParams c2 = cost_coefficients(2.0, 1.0);
    CHECK(c2.a == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c2.b == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(c2.c == doctest::Approx(-4.0).epsilon(1e-15));

    // minimum property for a few (p, scale) pairs
    for (double p : {1.5, 2.0, 3.0, 4.0, 6.0}) {
        for (double scale : {0.5, 1.0, 7.0}) {
            CostParams cp = cost_coefficients(p, scale);
            CHECK(cost_value(0.04, 0.04, 0.01, cp) == doctest::Approx(0.0).epsilon(1e-14));
            CHECK(cost_derivative(0.04, 0.04, 0.01, cp) == doctest::Approx(0.0).epsilon(1e-12));
        }
    }

    CHECK_THROWS_AS(cost_coefficients(1.0, 1.0), input_error);
    CHECK_THROWS_AS(cost_coefficients(0.5, 1.0), input_error);
    CHECK_THROWS_AS(cost_coefficients(4.0, 0.0), input_error);
}

TEST_CASE("hand-checked values at p = 4, scale = 1") {
    CostParams cp = cost_coefficients(4.0, 1.0);
    // y = (3 - 1)/(2 - 1) = 2: H = 2^5 + (5/3) 2^-3 - 8/3
    CHECK(cost_value(3.0, 2.0, 1.0, cp) == doctest::Approx(29.541666666666668).epsilon(1e-14));
    // H' = 5 (2^4 - 2^-4)
    CHECK(cost_derivative(3.0, 2.0, 1.0, cp) == doctest::Approx(79.6875).epsilon(1e-14));
    // conjugate at q = H'(3): argmax is 3, value = 3 q - H(3)
    CHECK(conjugate_argmax(79.6875, 2.0, 1.0, cp) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(conjugate_value(79.6875, 2.0, 1.0, cp)
          == doctest::Approx(3.0 * 79.6875 - 29.541666666666668).epsilon(1e-12));
}

TEST_CASE("domain boundaries and degenerate band") {
    CostParams cp = cost_coefficients(4.0, 1.0);
    const double inf = std::numeric_limits<double>::infinity();

    CHECK(cost_value(1.0, 2.0, 1.0, cp) == inf);   // x == s
    CHECK(cost_value(0.5, 2.0, 1.0, cp) == inf);   // x < s
    CHECK(cost_value(3.0, 1.0, 1.0, cp) == inf);   // x_bar == s

    // degenerate band: no admissible x, conventional zero
    CHECK(conjugate_argmax(5.0, 1.0, 1.0, cp) == 0.0);
    CHECK(conjugate_argmax(-5.0, 0.5, 1.0, cp) == 0.0);
    CHECK(conjugate_value(5.0, 1.0, 1.0, cp) == 0.0);
}

TEST_CASE("zero slope returns x_bar bitwise") {
    CostParams cp = cost_coefficients(4.0, 1.0);
    for (double x_bar : {0.04, 0.09, 0.123456789, 1.0}) {
        double s = 0.36 * x_bar;
        CHECK(conjugate_argmax(0.0, x_bar, s, cp) == x_bar);  // exact, not approx
        CHECK(conjugate_value(0.0, x_bar, s, cp) == 0.0);
    }
}

TEST_CASE("derivative matches a centered difference") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> up(1.5, 6.0), us(0.0, 0.9), ux(0.05, 8.0);
    for (int it = 0; it < 200; ++it) {
        CostParams cp = cost_coefficients(up(rng), 1.0 + us(rng));
        double x_bar = 0.04 * (1.0 + ux(rng));
        double s = us(rng) * x_bar;
        double x = s + ux(rng) * (x_bar - s);
        double h = 1e-6 * (x - s);
        double fd = (cost_value(x + h, x_bar, s, cp) - cost_value(x - h, x_bar, s, cp)) / (2 * h);
        double an = cost_derivative(x, x_bar, s, cp);
        CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)));
    }
}

TEST_CASE("midpoint convexity of the penalty") {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> up(1.5, 6.0), uy(0.02, 6.0);
    CostParams cp = cost_coefficients(4.0, 1.0);
    double x_bar = 0.09, s = 0.0324;
    for (int it = 0; it < 300; ++it) {
        double x1 = s + uy(rng) * (x_bar - s);
        double x2 = s + uy(rng) * (x_bar - s);
        double mid = cost_value(0.5 * (x1 + x2), x_bar, s, cp);
        double avg = 0.5 * (cost_value(x1, x_bar, s, cp) + cost_value(x2, x_bar, s, cp));
        CHECK(mid <= avg + 1e-12 * std::max(1.0, std::abs(avg)));
    }
}

TEST_CASE("conjugate round trip: derivative at the argmax recovers q") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> up(1.5, 6.0), usc(0.1, 10.0), uxb(1e-4, 1.0),
        ub(0.0, 0.9), ue(-6.0, 6.0), usign(0.0, 1.0);
    for (int it = 0; it < 500; ++it) {
        CostParams cp = cost_coefficients(up(rng), usc(rng));
        double x_bar = uxb(rng);
        double s = ub(rng) * x_bar;
        double q = std::pow(10.0, ue(rng)) * (usign(rng) < 0.5 ? -1.0 : 1.0);
        double xs = conjugate_argmax(q, x_bar, s, cp);
        REQUIRE(xs > s);
        double back = cost_derivative(xs, x_bar, s, cp);
        CHECK(std::abs(back - q) <= 1e-10 * std::max(1.0, std::abs(q)));
    }
}

TEST_CASE("closed-form argmax agrees with a brute-force scan") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> up(1.5, 5.0), uxb(0.01, 0.5), ub(0.0, 0.8),
        uq(-40.0, 40.0);
    const int n_grid = 20000;
    for (int it = 0; it < 100; ++it) {
        CostParams cp = cost_coefficients(up(rng), 1.0);
        double x_bar = uxb(rng);
        double s = ub(rng) * x_bar;
        double q = uq(rng) / (x_bar - s) * 0.05;  // keep the argmax well inside the scan window
        double lo = s + 1e-9 * (x_bar - s), hi = s + 12.0 * (x_bar - s);
        double best_x = lo, best_f = -std::numeric_limits<double>::infinity();
        double step = (hi - lo) / n_grid;
        for (int k = 0; k <= n_grid; ++k) {
            double x = lo + k * step;
            double f = x * q - cost_value(x, x_bar, s, cp);
            if (f > best_f) { best_f = f; best_x = x; }
        }
        double xs = conjugate_argmax(q, x_bar, s, cp);
        REQUIRE(xs < hi - step);  // argmax inside the scan window
        CHECK(std::abs(xs - best_x) <= step);  // within one scan cell
        CHECK(conjugate_value(q, x_bar, s, cp) >= best_f - 1e-12 * std::max(1.0, std::abs(best_f)));
    }
}

TEST_CASE("conjugate value dominates the x_bar candidate and is convex in q") {
    CostParams cp = cost_coefficients(4.0, 1.0);
    double x_bar = 0.04, s = 0.0144;
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> uq(-50.0, 50.0);
    for (int it = 0; it < 200; ++it) {
        double q1 = uq(rng), q2 = uq(rng);
        double f1 = conjugate_value(q1, x_bar, s, cp);
        double f2 = conjugate_value(q2, x_bar, s, cp);
        double fm = conjugate_value(0.5 * (q1 + q2), x_bar, s, cp);
        CHECK(f1 >= x_bar * q1 - 1e-12);
        CHECK(fm <= 0.5 * (f1 + f2) + 1e-10 * std::max(1.0, std::abs(f1) + std::abs(f2)));
    }
}

TEST_CASE("conjugate slope recovers the argmax") {
    CostParams cp = cost_coefficients(4.0, 1.0);
    double x_bar = 0.09, s = 0.0324;
    for (double q : {-30.0, -2.0, -0.1, 0.3, 5.0, 80.0}) {
        double h = 1e-5 * std::max(1.0, std::abs(q));
        double fd = (conjugate_value(q + h, x_bar, s, cp) - conjugate_value(q - h, x_bar, s, cp)) / (2 * h);
        CHECK(fd == doctest::Approx(conjugate_argmax(q, x_bar, s, cp)).epsilon(1e-5));
    }
}

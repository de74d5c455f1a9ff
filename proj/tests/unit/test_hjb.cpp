#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "lsvcal/cost.hpp"
#include "lsvcal/forward.hpp"
#include "lsvcal/hjb.hpp"

using namespace lsv;

namespace {

CalibrationProblem small_problem(int nt = 20) {
    CalibrationProblem p;
    p.heston = {2.0, 0.09, 0.3, -0.5, 0.05};
    p.spot = {std::log(100.0), 0.04};
    DomainSpec dom{std::log(100.0) - 0.8, std::log(100.0) + 0.8, 21, 0.0, 0.3, 11, 1.0, nt};
    Grids gr = build_grids(dom, p.spot);
    p.grid = gr.grid;
    p.tgrid = gr.tgrid;
    p.cost = cost_coefficients(4.0, 1.0);
    p.epsilon = 1e-4;
    return p;
}

OptionQuote call_quote(double K, double T, double price = 0.0) {
    return {PayoffKind::call, K, T, price, {}, {}};
}

}  // namespace

TEST_CASE("maturity buckets group quotes by time node") {
    CalibrationProblem p = small_problem();
    p.quotes = {call_quote(100.0, 0.5), call_quote(105.0, 1.0), call_quote(95.0, 0.5)};
    auto buckets = maturity_buckets(p);
    REQUIRE(buckets.size() == 21);
    CHECK(buckets[10] == std::vector<int>{0, 2});
    CHECK(buckets[20] == std::vector<int>{1});
    for (int k = 0; k < 21; ++k)
        if (k != 10 && k != 20) CHECK(buckets[k].empty());

    p.quotes.push_back(call_quote(100.0, 0.333));
    CHECK_THROWS_AS(maturity_buckets(p), input_error);
}

TEST_CASE("jump injection adds scaled payoffs, constant in v") {
    CalibrationProblem p = small_problem();
    p.quotes = {call_quote(100.0, 0.5), call_quote(95.0, 0.5)};
    const Grid2D& g = p.grid;

    std::vector<double> slice(g.nodes(), 1.0);
    apply_jump(p, {0, 1}, {0.0, 0.0}, slice.data());
    for (double x : slice) CHECK(x == 1.0);  // zero multipliers leave the slice alone

    std::vector<double> s_both(g.nodes(), 0.0), s_first(g.nodes(), 0.0), s_second(g.nodes(), 0.0);
    apply_jump(p, {0, 1}, {2.0, -0.5}, s_both.data());
    apply_jump(p, {0}, {2.0, -0.5}, s_first.data());
    apply_jump(p, {1}, {2.0, -0.5}, s_second.data());
    for (std::size_t n = 0; n < g.nodes(); ++n)
        CHECK(s_both[n] == doctest::Approx(s_first[n] + s_second[n]).epsilon(1e-14));
    for (int i = 0; i < g.nz; ++i) {
        double expect = 2.0 * payoff_eval(p.quotes[0], p.heston.rate, g.z[i]);
        for (int j = 0; j < g.nv; ++j)
            CHECK(s_first[g.at(i, j)] == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("zero multipliers are a fixed point") {
    CalibrationProblem p = small_problem();
    p.quotes = {call_quote(100.0, 0.5, 6.0), call_quote(105.0, 1.0, 5.0)};
    HjbSolution sol = solve_hjb(p, {0.0, 0.0});

    for (double x : sol.phi0) CHECK(std::abs(x) <= 1e-12);
    CHECK(sol.objective_term == 0.0);
    // the optimal diffusion collapses to the reference variance exactly
    for (int k = 0; k < sol.sigma2.n_slices; ++k) {
        const double* s2 = sol.sigma2.slice(k);
        for (int i = 0; i < p.grid.nz; ++i)
            for (int j = 0; j < p.grid.nv; ++j)
                CHECK(s2[p.grid.at(i, j)] == p.grid.v[j]);
    }
    CHECK(dual_objective(p, {0.0, 0.0}) == 0.0);
}

TEST_CASE("per-node supremum: flat slice keeps the reference variance") {
    CalibrationProblem p = small_problem();
    const Grid2D& g = p.grid;
    std::vector<double> phi(g.nodes(), 0.0), s2(g.nodes()), h(g.nodes());
    sup_step(g, p.heston, p.cost, phi.data(), s2.data(), h.data());
    for (int i = 0; i < g.nz; ++i)
        for (int j = 0; j < g.nv; ++j) {
            CHECK(s2[g.at(i, j)] == (g.v[j] > 0.0 ? g.v[j] : 0.0));
            CHECK(h[g.at(i, j)] == 0.0);
        }
}

TEST_CASE("per-node supremum: linear slice lowers the diffusion") {
    CalibrationProblem p = small_problem();
    const Grid2D& g = p.grid;
    std::vector<double> phi(g.nodes()), s2(g.nodes()), h(g.nodes());
    for (int i = 0; i < g.nz; ++i)
        for (int j = 0; j < g.nv; ++j) phi[g.at(i, j)] = g.z[i];
    sup_step(g, p.heston, p.cost, phi.data(), s2.data(), h.data());

    const double eb2 = p.heston.eta_bar * p.heston.eta_bar;
    for (int j = 1; j < g.nv; ++j) {
        double xbar = g.v[j], s = eb2 * xbar;
        for (int i = 0; i < g.nz; ++i) {
            std::size_t n = g.at(i, j);
            // q = (D_ZZ - D_Z)/2 = -1/2 pushes the optimum below the reference
            CHECK(s2[n] < xbar);
            CHECK(s2[n] > s);
            CHECK(s2[n] == doctest::Approx(conjugate_argmax(-0.5, xbar, s, p.cost)).epsilon(1e-14));
            CHECK(h[n] == doctest::Approx(cost_value(s2[n], xbar, s, p.cost)).epsilon(1e-12));
        }
    }
    // brute-force the supremum at one node
    {
        double xbar = g.v[3], s = eb2 * xbar;
        double best_x = 0.0, best_f = -1e300;
        for (int k = 1; k <= 200000; ++k) {
            double x = s + (xbar - s) * 6.0 * k / 200000.0;
            double f = -0.5 * x - cost_value(x, xbar, s, p.cost);
            if (f > best_f) { best_f = f; best_x = x; }
        }
        CHECK(s2[g.at(5, 3)] == doctest::Approx(best_x).epsilon(1e-4));
    }
}

TEST_CASE("constant payoffs ride through jumps and steps unchanged") {
    CalibrationProblem p = small_problem();
    OptionQuote flat;
    flat.kind = PayoffKind::tabulated;
    flat.maturity = 0.5;
    flat.price = 2.5;
    flat.tab_z = {p.grid.z_min, p.grid.z_max};
    flat.tab_value = {2.5, 2.5};
    p.quotes = {flat};

    HjbSolution sol = solve_hjb(p, {1.0});
    for (double x : sol.phi0) CHECK(x == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(dual_objective_from(p, {1.0}, sol) == doctest::Approx(0.0).epsilon(1e-11));
}

TEST_CASE("value converges as the time grid is refined") {
    double vals[3];
    int idx = 0;
    for (int nt : {20, 40, 80}) {
        CalibrationProblem p = small_problem(nt);
        p.quotes = {call_quote(100.0, 1.0, 10.0)};
        HjbSolution sol = solve_hjb(p, {0.5});
        vals[idx++] = sol.objective_term;
    }
    double e1 = std::abs(vals[0] - vals[1]);
    double e2 = std::abs(vals[1] - vals[2]);
    REQUIRE(e2 > 0.0);
    double order = std::log2(e1 / e2);
    CHECK(order >= 0.9);  // at least first order in dt
}

TEST_CASE("small multipliers reproduce the linear price") {
    CalibrationProblem p = small_problem();
    OptionQuote q = call_quote(100.0, 0.5);
    p.quotes = {q};

    HjbSolution base = solve_hjb(p, {0.0});
    double price = price_backward(p, base.sigma2, q);
    REQUIRE(price > 1.0);

    double lam = 1e-4;
    HjbSolution sol = solve_hjb(p, {lam});
    CHECK(sol.objective_term / lam == doctest::Approx(price).epsilon(1e-2));
}

TEST_CASE("dual objective is concave along random segments") {
    CalibrationProblem p = small_problem();
    p.quotes = {call_quote(95.0, 0.5, 8.0), call_quote(105.0, 1.0, 6.0)};
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int trial = 0; trial < 4; ++trial) {
        LambdaVector a{u(rng), u(rng)}, b{u(rng), u(rng)}, mid{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
        double Ja = dual_objective(p, a), Jb = dual_objective(p, b), Jm = dual_objective(p, mid);
        CHECK(Jm >= 0.5 * (Ja + Jb) - 1e-9);
    }
}

TEST_CASE("objective bookkeeping matches the solved slice") {
    CalibrationProblem p = small_problem();
    p.quotes = {call_quote(100.0, 0.5, 6.0), call_quote(105.0, 1.0, 5.0)};
    LambdaVector lam{0.3, -0.2};
    HjbSolution sol = solve_hjb(p, lam);
    double direct = lam[0] * 6.0 + lam[1] * 5.0 - sol.objective_term;
    CHECK(dual_objective_from(p, lam, sol) == doctest::Approx(direct).epsilon(1e-14));
    CHECK(dual_objective(p, lam) == doctest::Approx(direct).epsilon(1e-13));
    CHECK(sol.phi0[p.grid.at(p.grid.iz0, p.grid.iv0)] == sol.objective_term);
}

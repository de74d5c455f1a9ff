#include "lsvcal/hjb.hpp"

#include <cmath>

#include "lsvcal/cost.hpp"
#include "lsvcal/parallel.hpp"

namespace lsv {

std::vector<std::vector<int>> maturity_buckets(const CalibrationProblem& p) {
    std::vector<std::vector<int>> buckets(p.tgrid.nt + 1);
    for (std::size_t q = 0; q < p.quotes.size(); ++q) {
        int k = maturity_step_index(p.tgrid, p.quotes[q].maturity);
        if (k < 0) throw input_error("quote " + std::to_string(q) + ": maturity not on time grid");
        buckets[k].push_back(static_cast<int>(q));
    }
    return buckets;
}

void apply_jump(const CalibrationProblem& p, const std::vector<int>& quote_indices,
                const LambdaVector& lambda, double* slice) {
    const Grid2D& g = p.grid;
    for (int qi : quote_indices) {
        double lam = lambda[qi];
        if (lam == 0.0) continue;
        const OptionQuote& q = p.quotes[qi];
        for (int i = 0; i < g.nz; ++i) {
            double gz = lam * payoff_eval(q, p.heston.rate, g.z[i]);
            if (gz == 0.0) continue;
            double* row = slice + g.at(i, 0);
            for (int j = 0; j < g.nv; ++j) row[j] += gz;
        }
    }
}

void sup_step(const Grid2D& g, const HestonParams& hp, const CostParams& cost,
              const double* phi_next, double* sigma2, double* h, double cap_margin) {
    std::vector<double> q(g.nodes());
    slope_field(g, phi_next, q.data());
    const double eb2 = hp.eta_bar * hp.eta_bar;
    for (int j = 0; j < g.nv; ++j) {
        double xbar = g.v[j];
        double s = eb2 * xbar;
        double cap = xbar + cap_margin;
        for (int i = 0; i < g.nz; ++i) {
            std::size_t n = g.at(i, j);
            if (!(xbar - s > 0.0)) {
                sigma2[n] = 0.0;
                if (h) h[n] = 0.0;
                continue;
            }
            double x = conjugate_argmax(q[n], xbar, s, cost);
            // concave objective: the maximizer over (s, cap] is the projection
            if (cap_margin > 0.0 && x > cap) x = cap;
            sigma2[n] = x;
            if (h) h[n] = (q[n] == 0.0) ? 0.0 : cost_value(x, xbar, s, cost);
        }
    }
}

HjbSolution solve_hjb(const CalibrationProblem& p, const LambdaVector& lambda, bool store_phi) {
    if (lambda.size() != p.quotes.size())
        throw input_error("multiplier count does not match quote count");
    const Grid2D& g = p.grid;
    const int nt = p.tgrid.nt;
    const std::size_t nn = g.nodes();

    HjbSolution sol;
    sol.sigma2 = Grid3Field("sigma2", nt, g.nz, g.nv);
    if (store_phi) sol.phi_path = Grid3Field("phi", nt + 1, g.nz, g.nv);

    auto buckets = maturity_buckets(p);
    DouglasStepper stepper(g, p.adi_theta, p.tgrid.dt, p.threads);
    stepper.set_reference(build_reference_coefficients(g, p.heston));
    // explicit-mismatch stability budget: modes stay bounded while
    // sigma2 - V <= hz^2/dt, so cap the argmax at 80% of that
    const double cap_margin = 0.8 * g.hz * g.hz / p.tgrid.dt;

    std::vector<double> phi(nn, 0.0), next(nn), h(nn);
    if (store_phi) std::copy(phi.begin(), phi.end(), sol.phi_path.slice(nt));

    for (int k = nt - 1; k >= 0; --k) {
        if (!buckets[k + 1].empty()) {
            apply_jump(p, buckets[k + 1], lambda, phi.data());
            if (store_phi) std::copy(phi.begin(), phi.end(), sol.phi_path.slice(k + 1));
        }
        double* s2 = sol.sigma2.slice(k);
        sup_step(g, p.heston, p.cost, phi.data(), s2, h.data(), cap_margin);
        stepper.set_coefficients(build_coefficients(g, p.heston, s2));
        stepper.step_backward(phi.data(), h.data(), next.data());
        phi.swap(next);
        if (store_phi) std::copy(phi.begin(), phi.end(), sol.phi_path.slice(k));
    }

    for (double v : phi)
        if (!std::isfinite(v)) throw numerical_error("non-finite phi slice at t=0");
    sol.objective_term = phi[g.at(g.iz0, g.iv0)];
    sol.phi0 = std::move(phi);
    return sol;
}

double dual_objective_from(const CalibrationProblem& p, const LambdaVector& lambda,
                           const HjbSolution& sol) {
    double acc = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) acc += lambda[i] * p.quotes[i].price;
    return acc - sol.objective_term;
}

double dual_objective(const CalibrationProblem& p, const LambdaVector& lambda) {
    HjbSolution sol = solve_hjb(p, lambda);
    return dual_objective_from(p, lambda, sol);
}

}  // namespace lsv

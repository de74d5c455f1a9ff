#include "lsvcal/forward.hpp"

#include <cmath>

#include "lsvcal/hjb.hpp"
#include "lsvcal/operators.hpp"

namespace lsv {

std::vector<double> cell_weights(const Grid2D& g) {
    std::vector<double> w(g.nodes());
    for (int i = 0; i < g.nz; ++i) {
        double wi = (i == 0 || i == g.nz - 1) ? 0.5 * g.hz : g.hz;
        for (int j = 0; j < g.nv; ++j) {
            double wj = (j == 0 || j == g.nv - 1) ? 0.5 * g.hv : g.hv;
            w[g.at(i, j)] = wi * wj;
        }
    }
    return w;
}

double price_backward(const CalibrationProblem& p, const Grid3Field& sigma2,
                      const OptionQuote& quote) {
    const Grid2D& g = p.grid;
    int kq = maturity_step_index(p.tgrid, quote.maturity);
    if (kq < 0) throw input_error("maturity not on time grid");
    if (kq > sigma2.n_slices) throw input_error("sigma2 field does not cover the quote maturity");

    std::vector<double> phi(g.nodes()), next(g.nodes());
    for (int i = 0; i < g.nz; ++i) {
        double gi = payoff_eval(quote, p.heston.rate, g.z[i]);
        for (int j = 0; j < g.nv; ++j) phi[g.at(i, j)] = gi;
    }
    DouglasStepper stepper(g, p.adi_theta, p.tgrid.dt, p.threads);
    stepper.set_reference(build_reference_coefficients(g, p.heston));
    for (int k = kq - 1; k >= 0; --k) {
        stepper.set_coefficients(build_coefficients(g, p.heston, sigma2.slice(k)));
        stepper.step_backward(phi.data(), nullptr, next.data());
        phi.swap(next);
    }
    return phi[g.at(g.iz0, g.iv0)];
}

namespace {

// shared forward sweep; on_slice(k, mass_vector) fires after reaching t_k
template <typename F>
void forward_sweep(const CalibrationProblem& p, const Grid3Field& sigma2, F&& on_slice) {
    const Grid2D& g = p.grid;
    std::vector<double> m(g.nodes(), 0.0), next(g.nodes());
    m[g.at(g.iz0, g.iv0)] = 1.0;  // discrete Dirac at the snapped spot node
    on_slice(0, m);
    DouglasStepper stepper(g, p.adi_theta, p.tgrid.dt, p.threads);
    stepper.set_reference(build_reference_coefficients(g, p.heston));
    for (int k = 0; k < p.tgrid.nt; ++k) {
        stepper.set_coefficients(build_coefficients(g, p.heston, sigma2.slice(k)));
        stepper.step_forward(m.data(), next.data());
        m.swap(next);
        on_slice(k + 1, m);
    }
}

}  // namespace

DensityPath solve_fokker_planck(const CalibrationProblem& p, const Grid3Field& sigma2) {
    const Grid2D& g = p.grid;
    const int nt = p.tgrid.nt;
    DensityPath path;
    path.density = Grid3Field("density", nt + 1, g.nz, g.nv);
    path.mass.assign(nt + 1, 0.0);
    path.neg_mass.assign(nt + 1, 0.0);
    path.spot_mean.assign(nt + 1, 0.0);
    auto w = cell_weights(g);

    forward_sweep(p, sigma2, [&](int k, const std::vector<double>& m) {
        double* rho = path.density.slice(k);
        double mass = 0.0, neg = 0.0, mean = 0.0;
        for (int i = 0; i < g.nz; ++i) {
            double ez = std::exp(g.z[i]);
            for (int j = 0; j < g.nv; ++j) {
                std::size_t n = g.at(i, j);
                rho[n] = m[n] / w[n];
                mass += m[n];
                if (m[n] < 0.0) neg -= m[n];
                mean += ez * m[n];
            }
        }
        path.mass[k] = mass;
        path.neg_mass[k] = neg;
        path.spot_mean[k] = mean;
    });
    return path;
}

std::vector<double> prices_from_density(const CalibrationProblem& p, const DensityPath& path) {
    const Grid2D& g = p.grid;
    auto w = cell_weights(g);
    std::vector<double> prices(p.quotes.size(), 0.0);
    for (std::size_t qi = 0; qi < p.quotes.size(); ++qi) {
        const OptionQuote& q = p.quotes[qi];
        int k = maturity_step_index(p.tgrid, q.maturity);
        if (k < 0) throw input_error("maturity not on time grid");
        const double* rho = path.density.slice(k);
        double acc = 0.0;
        for (int i = 0; i < g.nz; ++i) {
            double gi = payoff_eval(q, p.heston.rate, g.z[i]);
            if (gi == 0.0) continue;
            for (int j = 0; j < g.nv; ++j) acc += gi * rho[g.at(i, j)] * w[g.at(i, j)];
        }
        prices[qi] = acc;
    }
    return prices;
}

std::vector<double> forward_prices(const CalibrationProblem& p, const Grid3Field& sigma2) {
    const Grid2D& g = p.grid;
    auto buckets = maturity_buckets(p);
    std::vector<double> prices(p.quotes.size(), 0.0);
    forward_sweep(p, sigma2, [&](int k, const std::vector<double>& m) {
        for (int qi : buckets[k]) {
            const OptionQuote& q = p.quotes[qi];
            double acc = 0.0;
            for (int i = 0; i < g.nz; ++i) {
                double gi = payoff_eval(q, p.heston.rate, g.z[i]);
                if (gi == 0.0) continue;
                const double* row = m.data() + g.at(i, 0);
                for (int j = 0; j < g.nv; ++j) acc += gi * row[j];
            }
            prices[qi] = acc;
        }
    });
    return prices;
}

}  // namespace lsv

#include "lsvcal/heston.hpp"

#include <cmath>
#include <complex>
#include <functional>

namespace lsv {

using cplx = std::complex<double>;

std::complex<double> heston_cf(const HestonParams& hp, double v0, cplx z, double T) {
    const double xi = hp.xi, xi2 = xi * xi;
    const cplx iz(0.0, 1.0);
    cplx zeta = z * z + iz * z;
    cplx w = hp.kappa - iz * hp.eta_bar * xi * z;
    cplx d = std::sqrt(w * w + xi2 * zeta);
    cplx wpd = w + d;                 // w - d = -xi^2 zeta / (w + d), kept implicit
    cplx r_minus = -zeta / wpd;       // (w - d)/xi^2
    cplx g = xi2 * r_minus / wpd;     // (w - d)/(w + d)
    cplx E = std::exp(-d * T);
    cplx D = r_minus * (1.0 - E) / (1.0 - g * E);
    cplx log_term;                    // log((1 - gE)/(1 - g)) / xi^2
    if (std::abs(g) < 1e-4) {
        // series in g avoids the xi^-2 blow-up of the cancelling logs
        cplx go = r_minus / wpd;      // g / xi^2 without dividing by xi^2
        cplx Ek = E;
        cplx gk = 1.0;
        log_term = 0.0;
        for (int k = 1; k <= 4; ++k) {
            log_term += gk * go * (1.0 - Ek) / static_cast<double>(k);
            gk *= g;
            Ek *= E;
        }
    } else {
        log_term = std::log((1.0 - g * E) / (1.0 - g)) / xi2;
    }
    cplx C = hp.kappa * hp.theta * (r_minus * T - 2.0 * log_term);
    return std::exp(C + D * v0);
}

namespace {

// adaptive Gauss-Lobatto (4-point Lobatto vs 7-point Kronrod extension)
class AdaptiveLobatto {
  public:
    AdaptiveLobatto(std::function<double(double)> f, double abs_tol)
        : f_(std::move(f)), tol_(abs_tol) {}

    double integrate(double a, double b) {
        depth_ = 0;
        return recurse(a, b, f_(a), f_(b), 0);
    }

  private:
    double recurse(double a, double b, double fa, double fb, int depth) {
        if (depth > 48) throw numerical_error("quadrature non-convergence on [" +
                                              std::to_string(a) + ", " + std::to_string(b) + "]");
        const double alpha = std::sqrt(2.0 / 3.0);
        const double beta = 1.0 / std::sqrt(5.0);
        double h = 0.5 * (b - a);
        double m = 0.5 * (a + b);
        double mll = m - alpha * h, ml = m - beta * h;
        double mr = m + beta * h, mrr = m + alpha * h;
        double fmll = f_(mll), fml = f_(ml), fm = f_(m), fmr = f_(mr), fmrr = f_(mrr);
        double i2 = (h / 6.0) * (fa + fb + 5.0 * (fml + fmr));
        double i1 = (h / 1470.0) * (77.0 * (fa + fb) + 432.0 * (fmll + fmrr) +
                                    625.0 * (fml + fmr) + 672.0 * fm);
        if (std::abs(i1 - i2) <= tol_ || mll <= a || b <= mrr) return i1;
        return recurse(a, mll, fa, fmll, depth + 1) + recurse(mll, ml, fmll, fml, depth + 1) +
               recurse(ml, m, fml, fm, depth + 1) + recurse(m, mr, fm, fmr, depth + 1) +
               recurse(mr, mrr, fmr, fmrr, depth + 1) + recurse(mrr, b, fmrr, fb, depth + 1);
    }

    std::function<double(double)> f_;
    double tol_;
    int depth_ = 0;
};

}  // namespace

double heston_call_price(const HestonParams& hp, const SpotState& spot, double K, double T) {
    if (!(K > 0.0)) throw input_error("strike must be positive");
    if (!(T > 0.0)) throw input_error("maturity must be positive");
    const double S0 = std::exp(spot.z0);
    const double k = std::log(S0 / K) + hp.rate * T;

    auto integrand = [&](double u) {
        cplx z(u, -0.5);
        cplx val = std::exp(cplx(0.0, u * k)) * heston_cf(hp, spot.v0, z, T);
        return val.real() / (u * u + 0.25);
    };

    // grow the truncation point until the integrand envelope is dead
    double u_max = 200.0;
    while (u_max < 1.0e5) {
        double env = std::abs(heston_cf(hp, spot.v0, cplx(u_max, -0.5), T)) / (u_max * u_max + 0.25);
        if (env < 1e-18) break;
        u_max *= 2.0;
    }

    AdaptiveLobatto quad(integrand, 1e-10);
    double I = quad.integrate(0.0, u_max);
    double price = S0 - std::sqrt(S0 * K) * std::exp(-hp.rate * T / 2.0) / M_PI * I;
    if (!std::isfinite(price)) throw numerical_error("heston price integral returned non-finite value");
    return price;
}

double bs_call_price(double S0, double K, double T, double r, double vol) {
    double df = std::exp(-r * T);
    if (!(T > 0.0) || !(vol > 0.0)) return std::max(S0 - K * df, 0.0);
    auto N = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    double sd = vol * std::sqrt(T);
    double d1 = (std::log(S0 / K) + (r + 0.5 * vol * vol) * T) / sd;
    return S0 * N(d1) - K * df * N(d1 - sd);
}

double implied_vol(double price, double S0, double K, double T, double r) {
    double intrinsic = std::max(S0 - K * std::exp(-r * T), 0.0);
    if (price < intrinsic - 1e-12)
        throw input_error("price below the forward-intrinsic lower bound");
    if (price >= S0)
        throw input_error("price at or above the spot upper bound");

    double lo = 0.0, hi = 5.0;
    if (bs_call_price(S0, K, T, r, hi) < price)
        throw input_error("price above the vol=5 bracket bound");

    double x = 0.2;
    for (int it = 0; it < 200; ++it) {
        double f = bs_call_price(S0, K, T, r, x) - price;
        if (std::abs(f) <= 1e-10) return x;
        if (f > 0.0) hi = x; else lo = x;
        double sd = x * std::sqrt(T);
        double d1 = (std::log(S0 / K) + (r + 0.5 * x * x) * T) / sd;
        double vega = S0 * std::exp(-0.5 * d1 * d1) / std::sqrt(2.0 * M_PI) * std::sqrt(T);
        double xn = (vega > 1e-14) ? x - f / vega : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        x = xn;
    }
    double f = bs_call_price(S0, K, T, r, x) - price;
    if (std::abs(f) <= 1e-10) return x;
    throw numerical_error("implied vol inversion did not reach tolerance");
}

}  // namespace lsv

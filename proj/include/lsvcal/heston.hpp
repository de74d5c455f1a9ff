#pragma once

#include <complex>
#include <string>

#include "lsvcal/types.hpp"

namespace lsv {

struct IvQuote {
    double maturity = 0.0;
    double strike = 0.0;      // price units
    double implied = 0.0;     // annualized
    std::string source;       // "input" | "model"
};

// characteristic function E[exp(i z X_T)] of the detrended log return
// X_T = ln(S_T/S_0) - r T, on the branch-stable parameterization
std::complex<double> heston_cf(const HestonParams& hp, double v0,
                               std::complex<double> z, double T);

// discounted European call via the single contour integral
//   C = S0 - sqrt(S0 K) e^{-rT/2} / pi * integral_0^inf Re[e^{iuk} cf(u - i/2)] / (u^2 + 1/4) du
// with k = ln(S0/K) + r T, adaptive Gauss-Lobatto quadrature, 1e-8 target
double heston_call_price(const HestonParams& hp, const SpotState& spot, double K, double T);

double bs_call_price(double S0, double K, double T, double r, double vol);

// safeguarded Newton/bisection inversion; |price error| <= 1e-10
double implied_vol(double price, double S0, double K, double T, double r);

}  // namespace lsv

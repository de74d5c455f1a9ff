#pragma once

#include "lsvcal/types.hpp"

namespace lsv {

// Convex penalty in the diffusion coefficient:
//   H(x; x_bar, s) = a y^{1+p} + b y^{1-p} + c,  y = (x - s)/(x_bar - s)
// for x > s and x_bar > s, +inf otherwise. Coefficients are fixed so the
// minimum sits at x = x_bar with H(x_bar) = 0; `scale` multiplies the whole
// penalty (a = scale).
CostParams cost_coefficients(double p, double scale);

// +inf sentinel (std::numeric_limits<double>::infinity()) outside the domain
double cost_value(double x, double x_bar, double s, const CostParams& cp);

// dH/dx = a(1+p)(y^p - y^{-p})/(x_bar - s); requires x > s, x_bar > s
double cost_derivative(double x, double x_bar, double s, const CostParams& cp);

// unique x in (s, inf) with dH/dx = q, i.e. the maximizer of x*q - H(x).
// Closed form: with Q = q(x_bar - s)/(a(1+p)) and u the positive root of
// u - 1/u = Q, the maximizer is x = s + u^{1/p}(x_bar - s).
// Degenerate band x_bar <= s (the variance floor row): returns 0.
double conjugate_argmax(double q, double x_bar, double s, const CostParams& cp);

// sup_x { x*q - H(x) }; 0 in the degenerate band
double conjugate_value(double q, double x_bar, double s, const CostParams& cp);

}  // namespace lsv

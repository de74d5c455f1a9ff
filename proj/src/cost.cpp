#include "lsvcal/cost.hpp"

#include <cmath>
#include <limits>

namespace lsv {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CostParams cost_coefficients(double p, double scale) {
    if (!(p > 1.0)) throw input_error("cost exponent must exceed 1");
    if (!(scale > 0.0)) throw input_error("cost scale must be positive");
    CostParams cp;
    cp.p = p;
    cp.scale = scale;
    cp.a = scale;
    cp.b = scale * (1.0 + p) / (p - 1.0);
    cp.c = -(cp.a + cp.b);
    return cp;
}

double cost_value(double x, double x_bar, double s, const CostParams& cp) {
    if (!(x > s) || !(x_bar > s)) return kInf;
    double y = (x - s) / (x_bar - s);
    return cp.a * std::pow(y, 1.0 + cp.p) + cp.b * std::pow(y, 1.0 - cp.p) + cp.c;
}

double cost_derivative(double x, double x_bar, double s, const CostParams& cp) {
    if (!(x > s) || !(x_bar > s)) throw input_error("cost derivative outside domain x > s, x_bar > s");
    double y = (x - s) / (x_bar - s);
    double yp = std::pow(y, cp.p);
    return cp.a * (1.0 + cp.p) * (yp - 1.0 / yp) / (x_bar - s);
}

double conjugate_argmax(double q, double x_bar, double s, const CostParams& cp) {
    if (!std::isfinite(q)) throw numerical_error("non-finite slope passed to conjugate_argmax");
    double w = x_bar - s;
    if (!(w > 0.0)) return 0.0;
    if (q == 0.0) return x_bar;  // exact minimizer, no float detour
    double Q = q * w / (cp.a * (1.0 + cp.p));
    // positive root of u - 1/u = Q, cancellation-safe on both signs
    double root = std::sqrt(Q * Q + 4.0);
    double u = (Q >= 0.0) ? 0.5 * (Q + root) : 2.0 / (root - Q);
    return s + std::pow(u, 1.0 / cp.p) * w;
}

double conjugate_value(double q, double x_bar, double s, const CostParams& cp) {
    double w = x_bar - s;
    if (!(w > 0.0)) return 0.0;
    if (q == 0.0) return 0.0;
    double x = conjugate_argmax(q, x_bar, s, cp);
    return x * q - cost_value(x, x_bar, s, cp);
}

}  // namespace lsv

#pragma once

#include <vector>

#include "lsvcal/types.hpp"

namespace lsv {

struct DensityPath {
    Grid3Field density;              // nt+1 slices, mass / cell-area units
    std::vector<double> mass;        // total mass per slice
    std::vector<double> neg_mass;    // magnitude of negative mass per slice
    std::vector<double> spot_mean;   // E[e^Z] per slice
};

// trapezoid cell weights; integral of a field = sum(w * field)
std::vector<double> cell_weights(const Grid2D& g);

// backward Feynman-Kac pricing sweep under the frozen sigma2 field:
// terminal slice G_i at the quote maturity, returns phi(0, Z0, V0)
double price_backward(const CalibrationProblem& p, const Grid3Field& sigma2,
                      const OptionQuote& quote);

// forward transport of the discrete Dirac initial mass at the snapped spot
// node, one step per sigma2 slice; the step is the exact transpose of the
// backward Douglas step, so mass is conserved to roundoff
DensityPath solve_fokker_planck(const CalibrationProblem& p, const Grid3Field& sigma2);

// quadrature of each quote payoff against the density slice at its maturity
std::vector<double> prices_from_density(const CalibrationProblem& p, const DensityPath& path);

// all quote prices from a single forward sweep without storing the path
std::vector<double> forward_prices(const CalibrationProblem& p, const Grid3Field& sigma2);

}  // namespace lsv

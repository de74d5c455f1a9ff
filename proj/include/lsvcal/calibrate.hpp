#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lsvcal/heston.hpp"
#include "lsvcal/hjb.hpp"
#include "lsvcal/types.hpp"

namespace lsv {

struct OptimSettings {
    int max_iter = 500;
    int memory = 10;          // quasi-Newton history length
    double c1 = 1e-4;         // Armijo constant
    int max_backtracks = 40;
    bool verbose = false;
};

struct IterationRecord {
    int iter = 0;
    double J = 0.0;
    double grad_inf = 0.0;
    double step = 0.0;
    int hjb_solves = 0;  // cumulative
};

struct RepricingRow {
    double maturity = 0.0;
    double strike = 0.0;
    double market_price = 0.0;
    double model_price = 0.0;
    double input_iv = 0.0;   // NaN when not invertible
    double model_iv = 0.0;
};

struct CalibrationResult {
    LambdaVector lambda_star;
    double J = 0.0;
    double grad_inf = 0.0;
    bool converged = false;
    std::string status;  // converged | max_iterations | line_search_failed | no_quotes
    std::vector<IterationRecord> trace;
    Grid3Field sigma2;
    Grid3Field eta;
    std::vector<double> model_prices;  // forward-density route at lambda_star
    std::vector<RepricingRow> repricing;
    int total_hjb_solves = 0;
};

// dJ/dlambda_i = c_i - model price_i under the sigma2 field frozen at lambda
std::vector<double> gradient(const CalibrationProblem& p, const LambdaVector& lambda);

CalibrationResult calibrate(const CalibrationProblem& p, const OptimSettings& s = {});

// sigma2 passthrough plus eta = eta_bar sqrt(V / sigma2); eta = eta_bar on the
// V = 0 row by continuity
std::pair<Grid3Field, Grid3Field> recover_surfaces(const HjbSolution& sol,
                                                   const HestonParams& hp, const Grid2D& g);

// rows with input/model prices inverted to implied vols (calls and puts)
std::vector<RepricingRow> build_repricing(const CalibrationProblem& p,
                                          const std::vector<double>& model_prices);

}  // namespace lsv

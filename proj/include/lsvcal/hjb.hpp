#pragma once

#include <vector>

#include "lsvcal/operators.hpp"
#include "lsvcal/types.hpp"

namespace lsv {

using LambdaVector = std::vector<double>;

struct HjbSolution {
    std::vector<double> phi0;   // phi(0, ., .)
    Grid3Field sigma2;          // one slice per time step, frozen during that step
    double objective_term = 0;  // phi(0, Z0, V0) at the snapped node
    Grid3Field phi_path;        // filled only when store_phi is set (post-jump continuation values)
};

// adds sum_i lambda_i G_i(Z) over quotes maturing at this slice (constant in V)
void apply_jump(const CalibrationProblem& p, const std::vector<int>& quote_indices,
                const LambdaVector& lambda, double* slice);

// per-node supremum given the upcoming slice: q = (D_ZZ phi - D_Z phi)/2,
// sigma2 = argmax_x { x q - H(x; V, eta_bar^2 V) }, h = H(sigma2) for the
// explicit inhomogeneity; on the degenerate V = 0 row sigma2 = h = 0.
// cap_margin > 0 restricts the argmax to x <= V + cap_margin, the stability
// budget of the explicit mismatch against the implicit reference operator;
// the bound is control-independent so the dual gradient stays exact
void sup_step(const Grid2D& g, const HestonParams& hp, const CostParams& cost,
              const double* phi_next, double* sigma2, double* h, double cap_margin = 0.0);

// backward Douglas sweep of the nonlinear equation with terminal phi(T) = 0 and
// jump injection phi(t-) = phi(t+) + sum lambda_i G_i at each quote maturity
HjbSolution solve_hjb(const CalibrationProblem& p, const LambdaVector& lambda,
                      bool store_phi = false);

// J(lambda) = sum_i lambda_i c_i - phi(0, Z0, V0)
double dual_objective(const CalibrationProblem& p, const LambdaVector& lambda);
double dual_objective_from(const CalibrationProblem& p, const LambdaVector& lambda,
                           const HjbSolution& sol);

// quote indices grouped by time-node index of their maturity; [k] lists quotes
// maturing at t_k
std::vector<std::vector<int>> maturity_buckets(const CalibrationProblem& p);

}  // namespace lsv

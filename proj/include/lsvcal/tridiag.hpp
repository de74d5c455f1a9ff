#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "lsvcal/errors.hpp"

namespace lsv {

// tridiagonal system; lo[0] and up[n-1] are ignored
struct Tridiag {
    std::vector<double> lo, di, up;

    explicit Tridiag(std::size_t n = 0) : lo(n, 0.0), di(n, 0.0), up(n, 0.0) {}
    std::size_t size() const { return di.size(); }
};

// Thomas algorithm, no pivoting; rhs is overwritten with the solution.
// scratch must have room for n doubles.
inline void tridiag_solve(const Tridiag& A, double* rhs, double* scratch) {
    const std::size_t n = A.size();
    double piv = A.di[0];
    if (piv == 0.0) throw numerical_error("singular tridiagonal system at row 0");
    scratch[0] = A.up[0] / piv;
    rhs[0] /= piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = A.di[i] - A.lo[i] * scratch[i - 1];
        if (piv == 0.0) throw numerical_error("singular tridiagonal system at row " + std::to_string(i));
        scratch[i] = A.up[i] / piv;
        rhs[i] = (rhs[i] - A.lo[i] * rhs[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

// solves A^T x = rhs for the same stored A: the transpose swaps the roles of
// the sub/super diagonals with a one-row shift
inline void tridiag_solve_transposed(const Tridiag& A, double* rhs, double* scratch) {
    const std::size_t n = A.size();
    double piv = A.di[0];
    if (piv == 0.0) throw numerical_error("singular tridiagonal system at row 0");
    // A^T has lower diag lo'[i] = up[i-1] and upper diag up'[i] = lo[i+1]
    scratch[0] = (n > 1 ? A.lo[1] : 0.0) / piv;
    rhs[0] /= piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = A.di[i] - A.up[i - 1] * scratch[i - 1];
        if (piv == 0.0) throw numerical_error("singular tridiagonal system at row " + std::to_string(i));
        scratch[i] = (i + 1 < n ? A.lo[i + 1] : 0.0) / piv;
        rhs[i] = (rhs[i] - A.up[i - 1] * rhs[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

}  // namespace lsv

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lsvcal/errors.hpp"

namespace lsv {

struct HestonParams {
    double kappa = 0.0;    // mean-reversion rate (1/year)
    double theta = 0.0;    // long-run variance
    double xi = 0.0;       // vol-of-vol (per sqrt(year))
    double eta_bar = 0.0;  // constant spot/vol correlation scale, in [-1, 1]
    double rate = 0.0;     // risk-free rate (1/year)
};

struct SpotState {
    double z0 = 0.0;  // log spot
    double v0 = 0.0;  // initial instantaneous variance, > 0
};

enum class PayoffKind { call, put, tabulated };

// one European quote; payoff is pre-discounted, G(z) = e^{-r t} (e^z - K)^+ for a call
struct OptionQuote {
    PayoffKind kind = PayoffKind::call;
    double strike = 0.0;    // price units
    double maturity = 0.0;  // years
    double price = 0.0;     // discounted market price
    // for tabulated payoffs: piecewise-linear in z, values already discounted
    std::vector<double> tab_z;
    std::vector<double> tab_value;
};

double payoff_eval(const OptionQuote& q, double rate, double z);

struct Grid2D {
    int nz = 0, nv = 0;
    double z_min = 0.0, z_max = 0.0;
    double v_min = 0.0, v_max = 0.0;
    double hz = 0.0, hv = 0.0;
    std::vector<double> z, v;  // node coordinates, uniform spacing
    int iz0 = -1, iv0 = -1;    // node indices of the snapped spot
    double snap_dz = 0.0, snap_dv = 0.0;  // displacement applied to land (z0,v0) on nodes

    std::size_t nodes() const { return static_cast<std::size_t>(nz) * nv; }
    std::size_t at(int i, int j) const { return static_cast<std::size_t>(i) * nv + j; }
};

struct TimeGrid {
    double t_max = 0.0;
    int nt = 0;  // number of steps; nt+1 node times k*dt
    double dt = 0.0;
    std::vector<double> t;
};

// requested bounds before spot snapping
struct DomainSpec {
    double z_min = 0.0, z_max = 0.0;
    int nz = 0;
    double v_min = 0.0, v_max = 0.0;
    int nv = 0;
    double t_max = 0.0;
    int nt = 0;
};

struct Grids {
    Grid2D grid;
    TimeGrid tgrid;
};

Grids build_grids(const DomainSpec& dom, const SpotState& spot);

// time-indexed scalar field over the space grid
struct Grid3Field {
    std::string tag;  // phi | sigma2 | density | price-slice
    int n_slices = 0;
    int nz = 0, nv = 0;
    std::vector<double> data;  // [k][i][j], row-major

    Grid3Field() = default;
    Grid3Field(std::string tag_, int n_slices_, int nz_, int nv_)
        : tag(std::move(tag_)), n_slices(n_slices_), nz(nz_), nv(nv_),
          data(static_cast<std::size_t>(n_slices_) * nz_ * nv_, 0.0) {}

    double* slice(int k) { return data.data() + static_cast<std::size_t>(k) * nz * nv; }
    const double* slice(int k) const { return data.data() + static_cast<std::size_t>(k) * nz * nv; }
    std::size_t slice_size() const { return static_cast<std::size_t>(nz) * nv; }
};

struct CostParams {
    double p = 0.0;      // exponent, > 1
    double a = 0.0, b = 0.0, c = 0.0;
    double scale = 1.0;  // free multiplicative scale fixing a
};

struct CalibrationProblem {
    HestonParams heston;
    SpotState spot;
    std::vector<OptionQuote> quotes;
    Grid2D grid;
    TimeGrid tgrid;
    CostParams cost;
    double epsilon = 1e-4;  // stopping tolerance on the sup-norm of the dual gradient
    double adi_theta = 0.5;
    int threads = 1;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate_problem(const CalibrationProblem& p);

// index of the time node matching maturity, or -1 when off-grid
int maturity_step_index(const TimeGrid& tg, double maturity);

}  // namespace lsv

#include "lsvcal/types.hpp"

#include <algorithm>
#include <cmath>

namespace lsv {

double payoff_eval(const OptionQuote& q, double rate, double z) {
    switch (q.kind) {
        case PayoffKind::call:
            return std::exp(-rate * q.maturity) * std::max(std::exp(z) - q.strike, 0.0);
        case PayoffKind::put:
            return std::exp(-rate * q.maturity) * std::max(q.strike - std::exp(z), 0.0);
        case PayoffKind::tabulated: {
            const auto& xs = q.tab_z;
            const auto& ys = q.tab_value;
            if (xs.empty()) throw input_error("tabulated payoff has no samples");
            if (xs.size() == 1 || z <= xs.front()) return ys.front();
            if (z >= xs.back()) return ys.back();
            auto it = std::upper_bound(xs.begin(), xs.end(), z);
            std::size_t hi = static_cast<std::size_t>(it - xs.begin());
            std::size_t lo = hi - 1;
            double w = (z - xs[lo]) / (xs[hi] - xs[lo]);
            return ys[lo] + w * (ys[hi] - ys[lo]);
        }
    }
    throw input_error("unknown payoff kind");
}

Grids build_grids(const DomainSpec& dom, const SpotState& spot) {
    if (dom.nz < 3 || dom.nv < 3) throw input_error("node count below minimum (need >= 3 per axis)");
    if (!(dom.z_min < dom.z_max)) throw input_error("z bounds must satisfy z_min < z_max");
    if (!(dom.v_min >= 0.0 && dom.v_min < dom.v_max)) throw input_error("v bounds must satisfy 0 <= v_min < v_max");
    if (dom.nt < 1) throw input_error("time step count below minimum");
    if (!(dom.t_max > 0.0)) throw input_error("horizon must be positive");
    if (!(spot.z0 > dom.z_min && spot.z0 < dom.z_max)) throw input_error("spot log-price outside z domain");
    if (!(spot.v0 > dom.v_min && spot.v0 < dom.v_max)) throw input_error("spot variance outside v domain");

    Grid2D g;
    g.nz = dom.nz;
    g.nv = dom.nv;
    g.hz = (dom.z_max - dom.z_min) / (dom.nz - 1);

    // translate the z grid so the nearest node lands exactly on z0
    int iz0 = static_cast<int>(std::lround((spot.z0 - dom.z_min) / g.hz));
    iz0 = std::clamp(iz0, 1, dom.nz - 2);
    g.iz0 = iz0;
    g.snap_dz = spot.z0 - (dom.z_min + iz0 * g.hz);
    g.z.resize(dom.nz);
    for (int i = 0; i < dom.nz; ++i) g.z[i] = spot.z0 + (i - iz0) * g.hz;
    g.z_min = g.z.front();
    g.z_max = g.z.back();

    // snap v: with v_min = 0 the floor row is structural, so rescale spacing about it;
    // otherwise translate like z
    double hv_req = (dom.v_max - dom.v_min) / (dom.nv - 1);
    int iv0 = static_cast<int>(std::lround((spot.v0 - dom.v_min) / hv_req));
    iv0 = std::clamp(iv0, 1, dom.nv - 2);
    g.iv0 = iv0;
    g.v.resize(dom.nv);
    if (dom.v_min == 0.0) {
        g.hv = spot.v0 / iv0;
        for (int j = 0; j < dom.nv; ++j) g.v[j] = spot.v0 * (static_cast<double>(j) / iv0);
        g.v[iv0] = spot.v0;
        g.v[0] = 0.0;
        g.snap_dv = (dom.nv - 1) * g.hv - (dom.v_max - dom.v_min);  // change of v_max
    } else {
        g.hv = hv_req;
        g.snap_dv = spot.v0 - (dom.v_min + iv0 * hv_req);
        for (int j = 0; j < dom.nv; ++j) g.v[j] = spot.v0 + (j - iv0) * g.hv;
    }
    g.v_min = g.v.front();
    g.v_max = g.v.back();

    TimeGrid tg;
    tg.t_max = dom.t_max;
    tg.nt = dom.nt;
    tg.dt = dom.t_max / dom.nt;
    tg.t.resize(dom.nt + 1);
    for (int k = 0; k <= dom.nt; ++k) tg.t[k] = k * tg.dt;
    tg.t[dom.nt] = dom.t_max;

    return Grids{std::move(g), std::move(tg)};
}

int maturity_step_index(const TimeGrid& tg, double maturity) {
    double x = maturity / tg.dt;
    int k = static_cast<int>(std::lround(x));
    if (k < 0 || k > tg.nt) return -1;
    if (std::abs(k * tg.dt - maturity) > 1e-9 * std::max(1.0, maturity)) return -1;
    return k;
}

ValidationReport validate_problem(const CalibrationProblem& p) {
    ValidationReport rep;
    auto add = [&rep](const std::string& s) { rep.violations.push_back(s); };

    if (!(p.heston.kappa > 0.0)) add("kappa must be positive");
    if (!(p.heston.theta > 0.0)) add("theta must be positive");
    if (!(p.heston.xi > 0.0)) add("xi must be positive");
    if (std::abs(p.heston.eta_bar) > 1.0) add("correlation outside [-1,1]");
    if (!(p.spot.v0 > 0.0)) add("initial variance must be positive");
    if (p.quotes.empty()) add("quote list is empty");
    if (!(p.epsilon > 0.0)) add("epsilon must be positive");
    if (!(p.cost.p > 1.0)) add("cost exponent must exceed 1");
    if (!(p.cost.scale > 0.0)) add("cost scale must be positive");
    if (!(p.adi_theta > 0.0 && p.adi_theta <= 1.0)) add("adi weight outside (0,1]");

    for (std::size_t i = 0; i < p.quotes.size(); ++i) {
        const auto& q = p.quotes[i];
        std::string tagi = "quote " + std::to_string(i) + ": ";
        if (!(q.maturity > 0.0 && q.maturity <= p.tgrid.t_max + 1e-12))
            add(tagi + "maturity outside (0, T]");
        else if (maturity_step_index(p.tgrid, q.maturity) < 0)
            add(tagi + "maturity not on time grid");
        if (q.price < 0.0) add(tagi + "negative price");
        if (q.kind != PayoffKind::tabulated && !(q.strike > 0.0)) add(tagi + "strike must be positive");
        if (q.kind == PayoffKind::tabulated && q.tab_z.size() != q.tab_value.size())
            add(tagi + "tabulated payoff sample size mismatch");
    }
    return rep;
}

}  // namespace lsv

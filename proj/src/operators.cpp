#include "lsvcal/operators.hpp"

#include <cmath>

#include "lsvcal/parallel.hpp"

namespace lsv {

PdeCoefficients build_coefficients(const Grid2D& g, const HestonParams& hp, const double* sigma2) {
    PdeCoefficients pc;
    pc.adv_z.resize(g.nodes());
    pc.dif_z.resize(g.nodes());
    pc.adv_v.resize(g.nv);
    pc.dif_v.resize(g.nv);
    pc.mix.resize(g.nv);
    for (int j = 0; j < g.nv; ++j) {
        double V = g.v[j];
        pc.adv_v[j] = hp.kappa * (hp.theta - V);
        pc.dif_v[j] = 0.5 * hp.xi * hp.xi * V;
        pc.mix[j] = hp.eta_bar * hp.xi * V;
    }
    for (int i = 0; i < g.nz; ++i) {
        for (int j = 0; j < g.nv; ++j) {
            std::size_t n = g.at(i, j);
            double s2 = sigma2[n];
            pc.adv_z[n] = hp.rate - 0.5 * s2;
            pc.dif_z[n] = 0.5 * s2;
            // ellipticity: mixed^2 <= 4 * dif_z * dif_v, i.e. sigma2 >= eta_bar^2 V
            if (pc.mix[j] * pc.mix[j] > 4.0 * pc.dif_z[n] * pc.dif_v[j] * (1.0 + 1e-12))
                throw numerical_error("ellipticity violated at node (" + std::to_string(i) + "," +
                                      std::to_string(j) + "): sigma2 < eta_bar^2 V");
        }
    }
    return pc;
}

PdeCoefficients build_reference_coefficients(const Grid2D& g, const HestonParams& hp) {
    std::vector<double> s2(g.nodes());
    for (int i = 0; i < g.nz; ++i)
        for (int j = 0; j < g.nv; ++j) s2[g.at(i, j)] = g.v[j];
    return build_coefficients(g, hp, s2.data());
}

void slope_field(const Grid2D& g, const double* f, double* q) {
    const int nz = g.nz, nv = g.nv;
    const double hz = g.hz;
    const double c1 = 0.5 / (2.0 * hz);   // D_Z weight inside q = (D_ZZ - D_Z)/2
    const double c2 = 0.5 / (hz * hz);    // D_ZZ weight
    const double ce = 0.5 / hz;           // one-sided D_Z at edges
    for (int j = 0; j < nv; ++j) {
        q[g.at(0, j)] = -ce * (f[g.at(1, j)] - f[g.at(0, j)]);
        q[g.at(nz - 1, j)] = -ce * (f[g.at(nz - 1, j)] - f[g.at(nz - 2, j)]);
    }
    for (int i = 1; i < nz - 1; ++i) {
        for (int j = 0; j < nv; ++j) {
            double fm = f[g.at(i - 1, j)], f0 = f[g.at(i, j)], fp = f[g.at(i + 1, j)];
            q[g.at(i, j)] = c2 * ((fp - f0) + (fm - f0)) - c1 * (fp - fm);
        }
    }
}

DouglasStepper::DouglasStepper(const Grid2D& g, double theta_adi, double dt, int threads)
    : g_(g), th_(theta_adi), dt_(dt), threads_(threads) {
    std::size_t n = g.nodes();
    z_lo_.assign(n, 0.0);
    z_up_.assign(n, 0.0);
    v_lo_.assign(g.nv, 0.0);
    v_up_.assign(g.nv, 0.0);
    mixc_.assign(g.nv, 0.0);
    af_.assign(n, 0.0);
    y0_.assign(n, 0.0);
    a1f_.assign(n, 0.0);
    a2f_.assign(n, 0.0);
    r1f_.assign(n, 0.0);
    uA_.assign(n, 0.0);
    wA_.assign(n, 0.0);
    gv_.assign(n, 0.0);
}

namespace {
void fill_z_rows(const Grid2D& g, const PdeCoefficients& pc,
                 std::vector<double>& lo, std::vector<double>& up) {
    const int nz = g.nz, nv = g.nv;
    const double hz = g.hz;
    for (int j = 0; j < nv; ++j) {
        for (int i = 0; i < nz; ++i) {
            std::size_t n = g.at(i, j);
            double adv = pc.adv_z[n], dif = pc.dif_z[n];
            if (i == 0) {
                lo[n] = 0.0;
                up[n] = adv / hz;             // one-sided drift, D_ZZ = 0 at the edge
            } else if (i == nz - 1) {
                lo[n] = -adv / hz;
                up[n] = 0.0;
            } else {
                lo[n] = dif / (hz * hz) - adv / (2.0 * hz);
                up[n] = dif / (hz * hz) + adv / (2.0 * hz);
            }
        }
    }
}
}  // namespace

void DouglasStepper::set_reference(const PdeCoefficients& pc) {
    z_lo_ref_.assign(g_.nodes(), 0.0);
    z_up_ref_.assign(g_.nodes(), 0.0);
    fill_z_rows(g_, pc, z_lo_ref_, z_up_ref_);
    has_ref_ = true;
}

void DouglasStepper::set_coefficients(const PdeCoefficients& pc) {
    const int nv = g_.nv;
    const double hv = g_.hv;
    fill_z_rows(g_, pc, z_lo_, z_up_);
    for (int j = 0; j < nv; ++j) {
        double adv = pc.adv_v[j], dif = pc.dif_v[j];
        if (j == 0) {
            v_lo_[j] = 0.0;
            v_up_[j] = adv / hv;              // V = 0: diffusion and mixed vanish, drift points up
        } else if (j == nv - 1) {
            v_lo_[j] = -adv / hv;             // D_VV = 0 at the cap, drift one-sided down
            v_up_[j] = 0.0;
        } else {
            v_lo_[j] = dif / (hv * hv) - adv / (2.0 * hv);
            v_up_[j] = dif / (hv * hv) + adv / (2.0 * hv);
        }
        mixc_[j] = pc.mix[j];
    }
}

void DouglasStepper::apply_z_with(const std::vector<double>& lo, const std::vector<double>& up,
                                  const double* f, double* out) const {
    const int nz = g_.nz, nv = g_.nv;
    for (int i = 0; i < nz; ++i) {
        for (int j = 0; j < nv; ++j) {
            std::size_t n = g_.at(i, j);
            double acc = 0.0;
            if (i > 0) acc += lo[n] * (f[g_.at(i - 1, j)] - f[n]);
            if (i < nz - 1) acc += up[n] * (f[g_.at(i + 1, j)] - f[n]);
            out[n] = acc;
        }
    }
}

void DouglasStepper::apply_z_t_with(const std::vector<double>& lo, const std::vector<double>& up,
                                    const double* f, double* out) const {
    const int nz = g_.nz, nv = g_.nv;
    std::fill(out, out + g_.nodes(), 0.0);
    for (int i = 0; i < nz; ++i) {
        for (int j = 0; j < nv; ++j) {
            std::size_t n = g_.at(i, j);
            double m = f[n];
            if (i > 0) {
                out[g_.at(i - 1, j)] += lo[n] * m;
                out[n] -= lo[n] * m;
            }
            if (i < nz - 1) {
                out[g_.at(i + 1, j)] += up[n] * m;
                out[n] -= up[n] * m;
            }
        }
    }
}

void DouglasStepper::apply_a1(const double* f, double* out) const {
    apply_z_with(z_lo_, z_up_, f, out);
}

void DouglasStepper::apply_a1_t(const double* f, double* out) const {
    apply_z_t_with(z_lo_, z_up_, f, out);
}

void DouglasStepper::apply_a2(const double* f, double* out) const {
    const int nz = g_.nz, nv = g_.nv;
    for (int i = 0; i < nz; ++i) {
        for (int j = 0; j < nv; ++j) {
            std::size_t n = g_.at(i, j);
            double acc = 0.0;
            if (j > 0) acc += v_lo_[j] * (f[n - 1] - f[n]);
            if (j < nv - 1) acc += v_up_[j] * (f[n + 1] - f[n]);
            out[n] = acc;
        }
    }
}

void DouglasStepper::apply_a2_t(const double* f, double* out) const {
    const int nz = g_.nz, nv = g_.nv;
    std::fill(out, out + g_.nodes(), 0.0);
    for (int i = 0; i < nz; ++i) {
        for (int j = 0; j < nv; ++j) {
            std::size_t n = g_.at(i, j);
            double m = f[n];
            if (j > 0) {
                out[n - 1] += v_lo_[j] * m;
                out[n] -= v_lo_[j] * m;
            }
            if (j < nv - 1) {
                out[n + 1] += v_up_[j] * m;
                out[n] -= v_up_[j] * m;
            }
        }
    }
}

void DouglasStepper::apply_a0(const double* f, double* out) const {
    const int nz = g_.nz, nv = g_.nv;
    const double hz = g_.hz, hv = g_.hv;
    // gv = first v-derivative (centered interior, one-sided edges)
    for (int i = 0; i < nz; ++i) {
        std::size_t row = g_.at(i, 0);
        gv_[row] = (f[row + 1] - f[row]) / hv;
        gv_[row + nv - 1] = (f[row + nv - 1] - f[row + nv - 2]) / hv;
        for (int j = 1; j < nv - 1; ++j)
            gv_[row + j] = (f[row + j + 1] - f[row + j - 1]) / (2.0 * hv);
    }
    // out = mix * first z-derivative of gv
    for (int j = 0; j < nv; ++j) {
        out[g_.at(0, j)] = mixc_[j] * (gv_[g_.at(1, j)] - gv_[g_.at(0, j)]) / hz;
        out[g_.at(nz - 1, j)] = mixc_[j] * (gv_[g_.at(nz - 1, j)] - gv_[g_.at(nz - 2, j)]) / hz;
    }
    for (int i = 1; i < nz - 1; ++i)
        for (int j = 0; j < nv; ++j)
            out[g_.at(i, j)] = mixc_[j] * (gv_[g_.at(i + 1, j)] - gv_[g_.at(i - 1, j)]) / (2.0 * hz);
}

void DouglasStepper::apply_a0_t(const double* f, double* out) const {
    const int nz = g_.nz, nv = g_.nv;
    const double hz = g_.hz, hv = g_.hv;
    // transpose of out = C Dz Dv f is Dv^T Dz^T C f, applied by scattering
    for (std::size_t n = 0; n < g_.nodes(); ++n) gv_[n] = 0.0;
    for (int j = 0; j < nv; ++j) {
        for (int i = 0; i < nz; ++i) {
            double m = mixc_[j] * f[g_.at(i, j)];
            if (m == 0.0) continue;
            if (i == 0) {
                gv_[g_.at(1, j)] += m / hz;
                gv_[g_.at(0, j)] -= m / hz;
            } else if (i == nz - 1) {
                gv_[g_.at(nz - 1, j)] += m / hz;
                gv_[g_.at(nz - 2, j)] -= m / hz;
            } else {
                gv_[g_.at(i + 1, j)] += m / (2.0 * hz);
                gv_[g_.at(i - 1, j)] -= m / (2.0 * hz);
            }
        }
    }
    std::fill(out, out + g_.nodes(), 0.0);
    for (int i = 0; i < nz; ++i) {
        for (int j = 0; j < nv; ++j) {
            double m = gv_[g_.at(i, j)];
            if (m == 0.0) continue;
            std::size_t n = g_.at(i, j);
            if (j == 0) {
                out[n + 1] += m / hv;
                out[n] -= m / hv;
            } else if (j == nv - 1) {
                out[n] += m / hv;
                out[n - 1] -= m / hv;
            } else {
                out[n + 1] += m / (2.0 * hv);
                out[n - 1] -= m / (2.0 * hv);
            }
        }
    }
}

void DouglasStepper::solve_stage1(double* rhs) {
    const int nz = g_.nz, nv = g_.nv;
    const double c = th_ * dt_;
    const std::vector<double>& lo = has_ref_ ? z_lo_ref_ : z_lo_;
    const std::vector<double>& up = has_ref_ ? z_up_ref_ : z_up_;
    parallel_for(nv, threads_, [&](int j) {
        Tridiag A(nz);
        std::vector<double> line(nz), scratch(nz);
        for (int i = 0; i < nz; ++i) {
            std::size_t n = g_.at(i, j);
            A.lo[i] = -c * lo[n];
            A.up[i] = -c * up[n];
            A.di[i] = 1.0 + c * (lo[n] + up[n]);
            line[i] = rhs[n];
        }
        tridiag_solve(A, line.data(), scratch.data());
        for (int i = 0; i < nz; ++i) rhs[g_.at(i, j)] = line[i];
    });
}

void DouglasStepper::solve_stage1_t(double* rhs) {
    const int nz = g_.nz, nv = g_.nv;
    const double c = th_ * dt_;
    const std::vector<double>& lo = has_ref_ ? z_lo_ref_ : z_lo_;
    const std::vector<double>& up = has_ref_ ? z_up_ref_ : z_up_;
    parallel_for(nv, threads_, [&](int j) {
        Tridiag A(nz);
        std::vector<double> line(nz), scratch(nz);
        for (int i = 0; i < nz; ++i) {
            std::size_t n = g_.at(i, j);
            A.lo[i] = -c * lo[n];
            A.up[i] = -c * up[n];
            A.di[i] = 1.0 + c * (lo[n] + up[n]);
            line[i] = rhs[n];
        }
        tridiag_solve_transposed(A, line.data(), scratch.data());
        for (int i = 0; i < nz; ++i) rhs[g_.at(i, j)] = line[i];
    });
}

void DouglasStepper::solve_stage2(double* rhs) {
    const int nz = g_.nz, nv = g_.nv;
    const double c = th_ * dt_;
    Tridiag A(nv);
    for (int j = 0; j < nv; ++j) {
        A.lo[j] = -c * v_lo_[j];
        A.up[j] = -c * v_up_[j];
        A.di[j] = 1.0 + c * (v_lo_[j] + v_up_[j]);
    }
    parallel_for(nz, threads_, [&](int i) {
        std::vector<double> scratch(nv);
        tridiag_solve(A, rhs + g_.at(i, 0), scratch.data());
    });
}

void DouglasStepper::solve_stage2_t(double* rhs) {
    const int nz = g_.nz, nv = g_.nv;
    const double c = th_ * dt_;
    Tridiag A(nv);
    for (int j = 0; j < nv; ++j) {
        A.lo[j] = -c * v_lo_[j];
        A.up[j] = -c * v_up_[j];
        A.di[j] = 1.0 + c * (v_lo_[j] + v_up_[j]);
    }
    parallel_for(nz, threads_, [&](int i) {
        std::vector<double> scratch(nv);
        tridiag_solve_transposed(A, rhs + g_.at(i, 0), scratch.data());
    });
}

void DouglasStepper::step_backward(const double* f, const double* h, double* out) {
    const std::size_t n = g_.nodes();
    apply_a0(f, af_.data());
    apply_a1(f, a1f_.data());
    apply_a2(f, a2f_.data());
    // explicit predictor, then subtract the theta-weighted implicit parts of A1~, A2
    const double* r1f = a1f_.data();
    if (has_ref_) {
        apply_z_with(z_lo_ref_, z_up_ref_, f, r1f_.data());
        r1f = r1f_.data();
    }
    for (std::size_t k = 0; k < n; ++k) {
        double y0 = f[k] + dt_ * (af_[k] + a1f_[k] + a2f_[k]);
        if (h) y0 -= dt_ * h[k];
        out[k] = y0 - th_ * dt_ * r1f[k];
    }
    solve_stage1(out);
    for (std::size_t k = 0; k < n; ++k) out[k] -= th_ * dt_ * a2f_[k];
    solve_stage2(out);
}

void DouglasStepper::step_forward(const double* m, double* out) {
    const std::size_t n = g_.nodes();
    // u = L2^{-T} m, w = L1~^{-T} u, out = M^T w - th dt A2^T u
    // with M = I + dt A0 + dt A1 - th dt A1~ + dt A2
    std::copy(m, m + n, uA_.begin());
    solve_stage2_t(uA_.data());
    std::copy(uA_.begin(), uA_.end(), wA_.begin());
    solve_stage1_t(wA_.data());
    apply_a0_t(wA_.data(), af_.data());
    apply_a1_t(wA_.data(), a1f_.data());
    apply_a2_t(wA_.data(), a2f_.data());
    const double* r1f = a1f_.data();
    if (has_ref_) {
        apply_z_t_with(z_lo_ref_, z_up_ref_, wA_.data(), r1f_.data());
        r1f = r1f_.data();
    }
    for (std::size_t k = 0; k < n; ++k)
        out[k] = wA_[k] + dt_ * (af_[k] + a2f_[k] + a1f_[k] - th_ * r1f[k]);
    apply_a2_t(uA_.data(), a2f_.data());
    for (std::size_t k = 0; k < n; ++k) out[k] -= th_ * dt_ * a2f_[k];
}

}  // namespace lsv

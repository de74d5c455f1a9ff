#pragma once

#include <vector>

#include "lsvcal/tridiag.hpp"
#include "lsvcal/types.hpp"

namespace lsv {

// frozen per-step PDE coefficients:
//   z direction: advection r - sigma2/2, diffusion sigma2/2   (per node)
//   v direction: advection kappa(theta - V), diffusion xi^2 V/2 (per column)
//   mixed:       eta_bar * xi * V                               (per column)
struct PdeCoefficients {
    std::vector<double> adv_z, dif_z;        // size nz*nv
    std::vector<double> adv_v, dif_v, mix;   // size nv
};

PdeCoefficients build_coefficients(const Grid2D& g, const HestonParams& hp, const double* sigma2);

// coefficients of the uncontrolled dynamics (sigma2 = V), used as the
// lambda-independent implicit-stage operator
PdeCoefficients build_reference_coefficients(const Grid2D& g, const HestonParams& hp);

// q = (D_ZZ f - D_Z f)/2 with the operator's own stencils: centered interior,
// one-sided first derivative and vanishing second derivative at the z edges
void slope_field(const Grid2D& g, const double* f, double* q);

// One Douglas time step of
//   d_t phi + A0 phi + A1 phi + A2 phi = h
// backward in time (A0 mixed explicit, A1/A2 implicit with weight theta_adi),
// plus the exact transpose acting forward on mass vectors.
// Spatial rows are stored in difference form lo*(f[k-1]-f[k]) + up*(f[k+1]-f[k])
// so constants are annihilated exactly.
//
// When a reference operator is set, the implicit z-stage uses it instead of the
// control-dependent A1, which stays fully explicit in the predictor.  The whole
// step then depends on the controlled coefficients only through the explicit
// predictor, so the inner argmax makes the step first-order insensitive to the
// control and the dual gradient is exact at the discrete level.  The price is a
// mild explicit-mismatch stability bound, roughly sigma2 <= ref + hz^2/dt.
class DouglasStepper {
  public:
    DouglasStepper(const Grid2D& g, double theta_adi, double dt, int threads = 1);

    void set_coefficients(const PdeCoefficients& pc);
    void set_reference(const PdeCoefficients& pc);

    // out = phi_k from f = phi_{k+1}; h is the explicit inhomogeneity (may be null)
    void step_backward(const double* f, const double* h, double* out);

    // out = S^T m where S is the linear part of step_backward
    void step_forward(const double* m, double* out);

    // exposed for operator-level tests
    void apply_a0(const double* f, double* out) const;
    void apply_a0_t(const double* f, double* out) const;
    void apply_a1(const double* f, double* out) const;
    void apply_a1_t(const double* f, double* out) const;
    void apply_a2(const double* f, double* out) const;
    void apply_a2_t(const double* f, double* out) const;

  private:
    void solve_stage1(double* rhs);              // (I - th dt A1~) x = rhs, per z line
    void solve_stage2(double* rhs);              // (I - th dt A2) x = rhs, per v line
    void solve_stage1_t(double* rhs);
    void solve_stage2_t(double* rhs);
    void apply_z_with(const std::vector<double>& lo, const std::vector<double>& up,
                      const double* f, double* out) const;
    void apply_z_t_with(const std::vector<double>& lo, const std::vector<double>& up,
                        const double* f, double* out) const;

    const Grid2D& g_;
    double th_, dt_;
    int threads_;
    bool has_ref_ = false;
    std::vector<double> z_lo_, z_up_;            // per node
    std::vector<double> z_lo_ref_, z_up_ref_;    // implicit-stage operator when set
    std::vector<double> v_lo_, v_up_;            // per column j
    std::vector<double> mixc_;                   // per column j
    std::vector<double> af_, y0_, a1f_, a2f_, r1f_, uA_, wA_;  // work buffers
    mutable std::vector<double> gv_;                           // mixed-stencil scratch
};

}  // namespace lsv

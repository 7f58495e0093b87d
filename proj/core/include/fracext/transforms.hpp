#pragma once

// Kernel-to-kernel transforms: Taylor tables of the Poisson kernels in the
// extension variable, moment-based reconstruction of the heat kernel from
// those tables, and the Kannai-type transform pair linking the Dirichlet
// Poisson kernel with the wave kernel.
//
// Closed-manifold convergence note (differs from the open-space picture): the
// heat kernel tends to 1/vol, not 0, as t -> infty. The Neumann family
// therefore mixes kernels: a_0 uses the mean-zero kernel, a_j (j >= 1) the
// full kernel, and removing the zero mode inserts an exactly known y^{2s}
// term into the mean-zero transform. The Dirichlet family converges with the
// full kernel throughout.

#include <vector>

#include "fracext/kernels.hpp"
#include "fracext/specfun.hpp"
#include "fracext/spectra.hpp"

namespace fracext::transforms {

using spectra::ModeFunction;
using spectra::Point;
using spectra::SpectralManifold;

enum class TableKind { NeumannTaylor, DirichletTaylor, Moments };

// Taylor/moment coefficients of a Poisson kernel at fixed tangential points.
// Stored in scaled (series-coefficient) form to avoid factorial overflow:
//   Neumann:   P~(y) = scaled[0] + singular * y^{2s} + sum_{j>=1} scaled[j] y^{2j},
//              scaled[j] = (-1)^j 4^{-j} a_j / j!.
//   Dirichlet: P^D(y) = y^{2s} sum_l scaled[l] y^{2l},
//              scaled[l] = (-1)^l 4^{-l} c_l-integral / l!.
struct CoefficientTable {
    TableKind kind = TableKind::NeumannTaylor;
    double s = 0.5;
    Point x{0.0, 0.0}, z{0.0, 0.0};
    std::vector<double> scaled;
    // Absolute uncertainty of the raw integrals: the mode sums hit the
    // cancellation limit of the arithmetic at high order, and downstream
    // moment fits weight by this.
    std::vector<double> noise;
    double singular = 0.0;  // coefficient of y^{2s} (Neumann, mean-zero kernel)

    // Raw integral int K_t t^{s-1-j} dt (resp. t^{-1-s-l}); throws on overflow.
    double raw(int j) const;
    // Truncated series evaluation at y with J+1 terms.
    double evaluate(double y, int J) const;
};

CoefficientTable neumann_taylor_coeffs(const SpectralManifold& m, double s, const Point& x,
                                       const Point& z, int J, double rel_tol = 1e-11);
CoefficientTable dirichlet_taylor_coeffs(const SpectralManifold& m, double s, const Point& x,
                                         const Point& z, int J, double rel_tol = 1e-11,
                                         bool include_zero_mode = true);

// Single coefficient integral for an arbitrary kernel profile t -> K(t); the
// substrate of both tables and of the synthetic-kernel tests.
// exponent = s-1-j (Neumann) or -1-s-l (Dirichlet).
double taylor_coefficient_integral(const std::function<double(double)>& kernel, double exponent,
                                   specfun::DecayClass decay, double rel_tol = 1e-11);

// Result of an ill-posed moment inversion, with its a-posteriori residual.
struct MomentReconstruction {
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<double> refit_moments;
    double moment_residual = 0.0;   // relative, against the inputs
    double condition = 0.0;         // of the weighted design matrix
    bool ill_conditioned = false;   // condition > 1e12 (expected and reported)
    double ridge = 0.0;
    double decay_rate = 0.0;        // fitted exponential scale sigma
};

// Reconstruct phi on (0, inf) from moments m_j = int phi(r) r^j dr,
// j = 0..m.size()-1, for phi ~ r^beta * (smooth, exponentially decaying).
// Method: the moments are the Taylor data of the Fourier transform of phi;
// the fit performs the least-squares analytic continuation in a Laguerre
// basis r^beta L_i(2 sigma r) e^{-sigma r} whose transforms are rational,
// with ridge regularization chosen by the discrepancy principle. An optional
// per-moment absolute uncertainty weights the rows.
MomentReconstruction reconstruct_from_moments(const std::vector<double>& moments,
                                              const std::vector<double>& r_grid,
                                              double beta = 0.0, int n_basis = 0,
                                              double noise_floor = 1e-9,
                                              const std::vector<double>& moment_noise = {});

// Heat-kernel samples on t_grid from the Neumann Taylor table: the moments of
// K_{1/r} r^{-s} are the raw a_{j+1} entries.
MomentReconstruction heat_from_moments(const CoefficientTable& neumann_table,
                                       const std::vector<double>& t_grid,
                                       double noise_floor = 1e-9);

// Mode-wise Kannai transform: coefficient_k multiplied by
//   y^{2s} int_0^inf (tau + y^2)^{-3/2-s} sin(sqrt(tau lambda_k))/sqrt(lambda_k) dtau,
// evaluated through the Basset integral after integration by parts.
ModeFunction kannai_forward(const SpectralManifold& m, double s, double y,
                            const ModeFunction& f);

// Per-mode multiplier of the forward transform.
double kannai_mode_multiplier(double s, double lambda, double y);
// The multiplier equals kannai_ratio(s) * dirichlet_mode_profile for every
// mode including lambda = 0.
double kannai_ratio(double s);

struct WaveReconstruction {
    std::vector<double> tau_grid;
    std::vector<double> values;           // reconstructed action samples at sqrt(tau)
    MomentReconstruction moment_stage;    // diagnostics of the inner inversion
};

// Recover the wave profile sin(sqrt(tau) sqrt(lambda))/sqrt(lambda) (times
// the data coefficient) from Dirichlet data of a single mode, using the
// analytic derivatives at y = 1 of the transformed identity and the moment
// reconstruction on (0,1). orders = number of derivative moments used.
WaveReconstruction kannai_inverse_mode(double s, double lambda, double coefficient, int orders,
                                       const std::vector<double>& tau_grid,
                                       double noise_floor = 1e-10);

// Same inversion driven by a Dirichlet Taylor series sum_l g_l y^{2s+2l}
// normalized like the boundary-pinned kernel (g_l in units of the
// dirichlet_mode_profile expansion). Used by the reconstruction pipeline.
WaveReconstruction kannai_inverse_series(double s, const std::vector<double>& series,
                                         int orders, const std::vector<double>& tau_grid,
                                         double noise_floor = 1e-10);

// Moments int_0^1 h t^l for h(t) = t^{s-1/2} W((1-t)/t) given the shifted
// Basset-weight moments M_l = int_0^inf (tau+1)^{-(3/2+s+l)} W(tau) dtau.
// Exposed for the tests of the inversion chain.
std::vector<double> wave_weight_moments_from_mode(double s, double lambda, int orders);

}  // namespace fracext::transforms

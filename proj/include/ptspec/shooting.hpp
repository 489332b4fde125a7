#pragma once

#include <array>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "ptspec/model.hpp"
#include "ptspec/ode_core.hpp"

namespace ptspec {

// The five real unknowns of the outward-shooting formulation. The global
// phase is fixed by Im psi(0) = 0, which is why it never appears here.
struct ShootingState {
  double re_psi0 = 0.0;
  double re_dpsi0 = 0.0;
  double im_dpsi0 = 0.0;
  double re_mu = 1.0;
  double im_mu = 0.0;
  int n_label = -1;  // unperturbed level this state continues from (metadata)

  Complex mu() const { return {re_mu, im_mu}; }
};

struct SpectralPoint {
  int n_label = -1;
  Complex mu{0.0, 0.0};
  ProblemParams params;
  double residual_norm = 0.0;
  bool used_pseudoinverse = false;
  int iterations = 0;
  ShootingState state;  // converged unknown vector, reusable as a seed
  std::vector<std::pair<double, Complex>> wavefunction_samples;
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iterations = 60;
  double fd_step = 1e-7;       // forward-difference Jacobian step
  int max_backtracks = 8;      // Armijo halvings
  double h_target = 0.0;       // 0: mu-dependent default, frozen at the seed
  double x_max_override = 0.0; // 0: model default, frozen at the seed
  bool record_wavefunction = false;
};

// Residual components [Re r+, Im r+, Re r-, Im r-, N-1] with
//   r+- = psi'(+-X) +- kappa(X) psi(+-X),  kappa = sqrt(X^2 - Re mu),
//   N   = full-line Simpson norm from the two half-line integrations.
// The decay components are divided by sqrt(kappa) e^{W} M0, where W is the
// WKB growth exponent and M0 the origin amplitude of the trial state; this
// keeps them O(1) in the level distance and invariant under amplitude
// scaling, which the raw terminal values (spanning e^{+-W}) are not.
// The mesh is frozen per call via the options so the residual stays smooth
// in the unknowns.
std::array<double, 5> residual(const ShootingState& state,
                               const ProblemParams& params,
                               const SolveOptions& opts = {});

// Damped Newton on the five unknowns: forward-difference Jacobian,
// Armijo backtracking, Moore-Penrose step when the Jacobian degenerates
// (condition estimate > 1e14, as at exceptional points). A decay-only
// stage with the amplitude direction frozen runs first; the linear case is
// then rescaled exactly onto N = 1 and the full system polishes.
// Throws NoConvergence past the iteration cap.
SpectralPoint solve(const ShootingState& seed, const ProblemParams& params,
                    const SolveOptions& opts = {});

// Real restricted solve for the gamma = 0 nonlinear continuation:
// unknowns (re_psi0, re_dpsi0, re_mu), equations (Re r+, Re r-, N-1),
// imaginary parts pinned to zero by symmetry.
SpectralPoint solve_real(const ShootingState& seed, const ProblemParams& params,
                         const SolveOptions& opts = {});

// Analytic seed at gamma = 0, g = 0 in the PT gauge: even levels carry the
// amplitude in psi(0), odd levels in Im psi'(0).
ShootingState unperturbed_seed(int n);

// PT partner: if state solves at mu, this solves at conj(mu).
ShootingState conjugate_state(const ShootingState& state);

}  // namespace ptspec

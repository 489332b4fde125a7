#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "ptspec/model.hpp"

namespace ptspec {

using Complex = std::complex<double>;

struct WaveState {
  double x = 0.0;
  Complex psi{0.0, 0.0};
  Complex dpsi{0.0, 0.0};
};

enum class Direction { plus, minus };

struct IntegrationSettings {
  // Step target; mesh uses h = b / ceil(b / h_target) so a node lands on b.
  // 0 selects the mu-dependent default (see default_step_target).
  double h_target = 0.0;
  // Record (x, psi) every k-th node into samples; 0 disables recording.
  int record_every = 0;
  // Multiplies the WKB growth allowance in the runaway guard.
  double overflow_factor = 1e10;
};

struct IntegrationResult {
  WaveState terminal;          // state at +/- x_max (nearest mesh node >= x_max)
  double norm_contribution;    // Simpson quadrature of |psi|^2 on the mesh
  double max_magnitude;        // max |psi| along the trajectory
  std::vector<std::pair<double, Complex>> samples;
};

// Truncation target: mu error stays below 1e-8 up to n = 89 (h^4 scheme, the
// phase error grows with sqrt(mu), hence the 1/sqrt(mu) scaling).
double default_step_target(double mu_re);

// WKB amplitude exponent integral_{x_t}^{X} sqrt(t^2 - mu_re) dt with
// x_t = sqrt(max(mu_re, 0)); closed form. Growth scale of the dominant
// solution branch in the forbidden region.
double wkb_growth_exponent(double mu_re, double X);

// Derivative jump at a delta crossed in the outward direction (rightward at
// +b, leftward at -b): dpsi += i*gamma*psi at either position. In terms of
// the spatial jump [psi'] = psi'(x0+) - psi'(x0-), the coefficient is
// +i*gamma at +b and -i*gamma at -b (from integrating the Hamiltonian across
// the delta); traversing the -b jump leftward flips its sign back.
WaveState apply_delta_jump(const WaveState& state, const ProblemParams& params);

// Fixed-step RK4 on (psi, dpsi)' = (dpsi, (x^2 + g|psi|^2 - mu) psi) from
// x = 0 out to +/- effective x_max, applying the delta jump exactly at the
// mesh node on +/- b. Throws OverflowError past the runaway guard,
// StepMisaligned if the mesh cannot contain b.
IntegrationResult integrate_half_line(const WaveState& initial, Direction dir,
                                      Complex mu, const ProblemParams& params,
                                      const IntegrationSettings& settings = {});

}  // namespace ptspec

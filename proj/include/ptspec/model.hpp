#pragma once

#include <vector>

namespace ptspec {

// Oscillator units throughout: hbar = 2m = 1, trap potential x^2, level
// spacing 2. All modules share this convention; there is no unit layer.

enum class Parity { even, odd };

// Physical configuration of one Hamiltonian instance:
//   H = -d^2/dx^2 + x^2 + i*gamma*(delta(x-b) - delta(x+b)) + g*|psi|^2
struct ProblemParams {
  double gamma = 0.0;      // non-Hermiticity strength, >= 0 at the CLI
  double b = 0.2;          // delta position, > 0
  double g = 0.0;          // nonlinearity strength, >= 0
  int basis_cutoff = 120;  // oracle truncation
  double x_max = 0.0;      // integration half-width; 0 = derive from target mu

  // Integration half-width actually used for a level with Re mu ~ mu_target.
  // The decay residual needs the forbidden region to dominate but the norm
  // quadrature degrades once the window extends too far past the turning
  // point (growing-mode contamination), so the padding is kept at +3.
  double effective_x_max(double mu_target) const;

  void validate(double mu_target) const;  // throws ConfigError
};

struct UnperturbedLevel {
  int n;        // quantum number >= 0
  double mu;    // 2n+1 exactly
  Parity parity;
};

// Levels n = 0..n_max of the unperturbed oscillator, mu = 2n+1, ascending.
std::vector<UnperturbedLevel> unperturbed_spectrum(int n_max);

// x where the trap crosses the level energy: sqrt(2n+1).
double classical_turning_point(int n);

}  // namespace ptspec

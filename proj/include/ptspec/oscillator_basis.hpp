#pragma once

#include <complex>
#include <vector>

#include "ptspec/model.hpp"

namespace ptspec {

// Normalized harmonic-oscillator eigenfunction psi_n(x), evaluated by the
// stable three-term recurrence on the normalized functions
//   psi_{n+1} = x sqrt(2/(n+1)) psi_n - sqrt(n/(n+1)) psi_{n-1};
// H_n and the factorial are never formed separately.
double eval_oscillator_fn(int n, double x);

// psi_n(x) and psi_n'(x) together (one recurrence pass).
// psi_n' = sqrt(2n) psi_{n-1} - x psi_n.
struct FnAndDerivative {
  double value;
  double derivative;
};
FnAndDerivative eval_oscillator_fn_and_derivative(int n, double x);

// psi_0(x)..psi_{n_max}(x) in one pass.
std::vector<double> eval_oscillator_fn_upto(int n_max, double x);

// <psi_m | B | psi_n> for B = i*gamma*(delta(x-b) - delta(x+b)).
// Purely imaginary; exactly zero when m and n share parity (short-circuit).
std::complex<double> matrix_element(int m, int n, const ProblemParams& params);

struct MSBoundReport {
  double alpha = 0.25;     // fixed exponent
  double M_const = 0.0;    // 2|gamma| C_tilde^2
  double C_tilde = 0.0;    // smallest C with |psi_n(b)| <= C n^{-1/4} on valid n
  int n_max = 0;
  // Row-major (m-1, n-1) flags for 1 <= m, n <= n_max.
  std::vector<bool> pair_valid;      // 2(2k+1) >= b^2 for both indices
  std::vector<bool> pair_satisfied;  // |<m|B|n>| <= M m^{-1/4} n^{-1/4}
  bool all_valid_satisfied = false;

  bool valid(int m, int n) const { return pair_valid[idx(m, n)]; }
  bool satisfied(int m, int n) const { return pair_satisfied[idx(m, n)]; }
  std::size_t idx(int m, int n) const {
    return static_cast<std::size_t>(m - 1) * n_max + (n - 1);
  }
};

// Exhaustive scan over 1 <= m, n <= n_max; measures C_tilde empirically on
// the validity domain 2(2n+1) >= b^2 and checks the decay bound pairwise.
MSBoundReport ms_bound_scan(int n_max, const ProblemParams& params);

}  // namespace ptspec

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "ptspec/model.hpp"
#include "ptspec/shooting.hpp"

namespace ptspec {

// Linear-case (g = 0) reference route: diagonalization of the Hamiltonian in
// the truncated oscillator basis. Independent of the shooting path; the two
// are mutually validating.
struct TruncatedHamiltonian {
  int dim = 0;
  Eigen::MatrixXcd entries;  // H[m][n] = (2n+1) delta_mn + <m|B|n>
};

TruncatedHamiltonian build(const ProblemParams& params, int dim);

// All eigenvalues of the plain truncated matrix, sorted by real part
// (ties by imaginary part). Closed under conjugation to rounding.
// Throws NoConvergenceQR if the QR iteration fails.
std::vector<Complex> eigenvalues(const TruncatedHamiltonian& H);

// Eigenvalue nearest mu_ref of the tail-corrected truncation. The raw
// truncated matrix converges only like dim^{-1/2} (the delta couplings decay
// as n^{-1/4}), far too slow to certify shooting results; folding the
// m > dim block in at second order (Loewdin partition, denominators centered
// on mu_ref, smooth analytic remainder past m_tail) restores the accuracy.
Complex eigenvalue_near(const ProblemParams& params, int dim, double mu_ref,
                        long m_tail = 2'000'000);

// Lowest `count` tail-corrected eigenvalues, each resolved with its own
// centering at 2n+1; sorted by real part.
std::vector<Complex> corrected_lowest(const ProblemParams& params, int dim, int count);

// Max |drift| of the lowest probe_count corrected eigenvalues between
// truncation dim and dim+40; certifies basis_cutoff adequacy.
double truncation_check(const ProblemParams& params, int dim, int probe_count);

// Bisection on the discriminant proxy (mu_a - mu_b)^2 of the two lowest
// levels continued from (n_a, n_b): real-positive while the pair is real,
// negative once it is a conjugate pair. Returns gamma_c to tol.
double pair_coalescence_gamma(const ProblemParams& params_base, int dim, int n_a,
                              int n_b, double gamma_lo, double gamma_hi,
                              double tol = 1e-8);

// Shooting seed assembled from the corrected-oracle eigenvector: initial
// values from the basis expansion at x = 0, phase rotated into Im psi(0) = 0.
ShootingState oracle_seed(const ProblemParams& params, int dim, int n_label);

}  // namespace ptspec

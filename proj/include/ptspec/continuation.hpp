#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "ptspec/model.hpp"
#include "ptspec/shooting.hpp"

namespace ptspec {

enum class PathClass { robust, fragile, undetermined };
enum class BranchKind { coalescence, splitting };

struct BranchPoint {
  double gamma_c = 0.0;
  Complex mu_c{0.0, 0.0};
  std::pair<int, int> partner_labels{-1, -1};
  BranchKind kind = BranchKind::coalescence;
  double beta = 0.0;  // local exponent of |mu - mu_c| ~ |gamma - gamma_c|^beta
};

struct PathPoint {
  double gamma = 0.0;
  Complex mu{0.0, 0.0};
  double residual_norm = 0.0;
  ShootingState state;
};

struct ContinuationPath {
  int n_label = -1;
  double g = 0.0;
  double b = 0.0;
  std::vector<PathPoint> points;  // strictly increasing gamma
  std::vector<BranchPoint> branch_events;
  PathClass classification = PathClass::undetermined;
  bool lost = false;
  double lost_at_gamma = 0.0;
  bool detached_complex_branch = false;  // nonlinear branch found off the real path

  const PathPoint* at_gamma(double gamma, double tol = 1e-9) const;
};

struct SweepOptions {
  unsigned threads = 0;
  double im_threshold = 1e-8;      // real/complex decision
  double refine_jump = 0.1;        // |dmu| between grid points triggering refinement
  int refine_iterations = 25;      // corrector iteration count triggering refinement
  int refine_rounds = 3;           // halvings before a path counts as lost
  double branch_tol = 1e-8;        // bisection width for gamma_c
  bool fit_beta = true;
  bool probe_detached = false;     // look for complex branches off nonlinear real paths
  double h_target = 0.0;           // forwarded to the solver (0 = default)
  // Seeds at gamma_grid.front(); when absent, the unperturbed (or oracle)
  // seeds at g = 0 are used. Required for g > 0 sweeps (from sweep_g).
  std::vector<ShootingState> initial_states;
};

// Traces each level from its seed along the gamma grid with a secant
// predictor and the shooting corrector. Coalescing pairs are bisected to
// gamma_c, continued as conjugate-pair branches (lower label takes Im > 0),
// and splittings back onto the real axis are handled symmetrically. Paths
// whose corrector fails after local grid refinement are marked lost at that
// gamma and classified undetermined.
std::vector<ContinuationPath> sweep_gamma(const std::vector<int>& n_labels,
                                          const std::vector<double>& gamma_grid,
                                          const ProblemParams& params_base,
                                          const SweepOptions& opts = {});

// Bisection for the branch point between two paths known to bracket one:
// at gamma_lo the pair is real and distinct, at gamma_hi coalesced (kind
// coalescence) or vice versa (splitting). Fits the local exponent beta and
// throws NotABranchPoint when it falls outside [0.4, 0.6].
BranchPoint locate_branch_point(const ShootingState& state_a,
                                const ShootingState& state_b, double gamma_lo,
                                double gamma_hi, const ProblemParams& params,
                                const SweepOptions& opts = {});

// Continues each gamma = 0 real level from g = 0 to g_target in steps <= 0.5
// (real Newton, Im mu pinned). Returns the states at g_target, seeding
// sweep_gamma at fixed g.
std::vector<ShootingState> sweep_g(const std::vector<int>& n_labels, double g_target,
                                   const ProblemParams& params_base,
                                   const SweepOptions& opts = {});

PathClass classify(const ContinuationPath& path, double im_threshold = 1e-8);

}  // namespace ptspec

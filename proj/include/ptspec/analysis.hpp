#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ptspec/continuation.hpp"

namespace ptspec {

struct ShiftRecord {
  int n = 0;
  double delta_mu_abs = 0.0;  // |mu(gamma, g) - (2n+1)|, complex modulus
  bool is_complex = false;
  bool outlier = false;
};

enum class FitModel { power_law, half_inverse_bound, log_over_n32 };

struct FitResult {
  FitModel model = FitModel::power_law;
  double slope = 0.0;      // fixed -0.5 for the bound model
  double amplitude = 0.0;  // prefactor (envelope constant for the bound model)
  double r_squared = 0.0;
  std::pair<int, int> n_range{0, 0};
  int used_points = 0;
  int excluded_zero = 0;  // robust/node levels left out of the log-log fit
};

// Shift of every path at the requested gamma, which must be a grid point of
// each path (no interpolation). Conjugate-pair points contribute both
// members; their moduli coincide. Detached nonlinear branches are skipped.
std::vector<ShiftRecord> compute_shifts(const std::vector<ContinuationPath>& paths,
                                        double at_gamma);

// Least squares in log-log coordinates over n in [n_range.first, n_range.second].
// n = 0 and shifts below 1e-10 are excluded; fewer than 8 usable points is an
// InsufficientData error. power_law fits slope and amplitude; the bound model
// fixes the n^{-1/2} shape and reports the smallest dominating envelope
// constant; log_over_n32 fits the amplitude of log(n)/n^{3/2} alone.
FitResult fit_shrink_rate(const std::vector<ShiftRecord>& shifts, FitModel model,
                          std::pair<int, int> n_range);

// Flags records whose log-shift deviates from a centered rolling median
// (window 7) by more than 3 median absolute deviations.
std::vector<ShiftRecord> detect_outliers(std::vector<ShiftRecord> shifts);

struct SlopeEntry {
  double g = 0.0;
  double slope = 0.0;
  double amplitude = 0.0;
  double r_squared = 0.0;
  double oscillation_rms = 0.0;  // rms of log-residuals about the fitted line
};

struct SlopeOscillationReport {
  double at_gamma = 0.0;
  double b = 0.0;
  std::vector<SlopeEntry> entries;
  double slope_spread = 0.0;  // max - min over the fitted slopes
};

// Per-g free-slope fits at fixed (gamma, b) plus the residual oscillation
// amplitude around each fitted line.
SlopeOscillationReport slope_oscillation_report(
    const std::vector<std::vector<ShiftRecord>>& shifts_per_g,
    const std::vector<double>& g_values, double at_gamma, double b,
    std::pair<int, int> n_range);

std::string to_string(FitModel model);

}  // namespace ptspec

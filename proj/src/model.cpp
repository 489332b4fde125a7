#include "ptspec/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ptspec/errors.hpp"

namespace ptspec {

double ProblemParams::effective_x_max(double mu_target) const {
  if (x_max > 0.0) return x_max;
  return std::max(b + 6.0, std::sqrt(std::max(mu_target, 1.0)) + 3.0);
}

void ProblemParams::validate(double mu_target) const {
  if (!(b > 0.0)) throw ConfigError("ProblemParams: b must be > 0");
  if (g < 0.0) throw ConfigError("ProblemParams: g must be >= 0");
  if (basis_cutoff < 2) throw ConfigError("ProblemParams: basis_cutoff must be >= 2");
  const double xm = effective_x_max(mu_target);
  if (!(xm > b + 4.0))
    throw ConfigError("ProblemParams: x_max must exceed b + 4 (got " +
                      std::to_string(xm) + ")");
}

std::vector<UnperturbedLevel> unperturbed_spectrum(int n_max) {
  if (n_max < 0) throw ConfigError("unperturbed_spectrum: n_max must be >= 0");
  std::vector<UnperturbedLevel> levels;
  levels.reserve(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n)
    levels.push_back({n, 2.0 * n + 1.0, n % 2 == 0 ? Parity::even : Parity::odd});
  return levels;
}

double classical_turning_point(int n) {
  if (n < 0) throw ConfigError("classical_turning_point: n must be >= 0");
  return std::sqrt(2.0 * n + 1.0);
}

}  // namespace ptspec

#include "ptspec/oscillator_basis.hpp"

#include <cmath>
#include <string>

#include "ptspec/errors.hpp"

namespace ptspec {

namespace {

constexpr double kPiQuarterInv = 0.7511255444649425;  // pi^{-1/4}
constexpr int kMaxOrder = 500;
constexpr double kMaxAbscissa = 40.0;

void check_domain(int n, double x) {
  if (n < 0 || n > kMaxOrder)
    throw ConfigError("oscillator_basis: order out of [0," +
                      std::to_string(kMaxOrder) + "]: " + std::to_string(n));
  if (std::abs(x) > kMaxAbscissa)
    throw ConfigError("oscillator_basis: |x| > " + std::to_string(kMaxAbscissa));
}

// Runs the normalized recurrence, returning psi_{n-1} and psi_n.
// Values stay bounded (max |psi_n| < 1), so the only failure mode is a
// non-finite input propagating through; guarded at the end.
void recurrence(int n, double x, double& prev, double& cur) {
  prev = 0.0;
  cur = kPiQuarterInv * std::exp(-0.5 * x * x);
  for (int k = 0; k < n; ++k) {
    const double next =
        x * std::sqrt(2.0 / (k + 1)) * cur - std::sqrt(k / (k + 1.0)) * prev;
    prev = cur;
    cur = next;
  }
  if (!std::isfinite(cur))
    throw OverflowError("oscillator_basis: recurrence produced non-finite value");
}

}  // namespace

double eval_oscillator_fn(int n, double x) {
  check_domain(n, x);
  double prev, cur;
  recurrence(n, x, prev, cur);
  return cur;
}

FnAndDerivative eval_oscillator_fn_and_derivative(int n, double x) {
  check_domain(n, x);
  double prev, cur;
  recurrence(n, x, prev, cur);
  return {cur, std::sqrt(2.0 * n) * prev - x * cur};
}

std::vector<double> eval_oscillator_fn_upto(int n_max, double x) {
  check_domain(n_max, x);
  std::vector<double> v(static_cast<std::size_t>(n_max) + 1);
  v[0] = kPiQuarterInv * std::exp(-0.5 * x * x);
  if (n_max >= 1) v[1] = x * std::sqrt(2.0) * v[0];
  for (int k = 1; k < n_max; ++k)
    v[k + 1] = x * std::sqrt(2.0 / (k + 1)) * v[k] - std::sqrt(k / (k + 1.0)) * v[k - 1];
  return v;
}

std::complex<double> matrix_element(int m, int n, const ProblemParams& params) {
  if (m < 0 || n < 0) throw ConfigError("matrix_element: indices must be >= 0");
  if ((m + n) % 2 == 0) return {0.0, 0.0};  // equal parity: exact zero
  // psi(-b) psi(-b) = (-1)^{m+n} psi(b) psi(b); for opposite parity the two
  // delta contributions add.
  const double prod = eval_oscillator_fn(m, params.b) * eval_oscillator_fn(n, params.b);
  return {0.0, 2.0 * params.gamma * prod};
}

MSBoundReport ms_bound_scan(int n_max, const ProblemParams& params) {
  if (n_max < 1) throw ConfigError("ms_bound_scan: n_max must be >= 1");
  MSBoundReport rep;
  rep.n_max = n_max;

  const std::vector<double> psi_b = eval_oscillator_fn_upto(n_max, params.b);
  std::vector<bool> idx_valid(static_cast<std::size_t>(n_max) + 1, false);
  for (int k = 1; k <= n_max; ++k)
    idx_valid[k] = 2.0 * (2.0 * k + 1.0) >= params.b * params.b;

  double c_tilde = 0.0;
  for (int k = 1; k <= n_max; ++k)
    if (idx_valid[k])
      c_tilde = std::max(c_tilde, std::abs(psi_b[k]) * std::pow(k, 0.25));
  rep.C_tilde = c_tilde;
  rep.M_const = 2.0 * std::abs(params.gamma) * c_tilde * c_tilde;

  const std::size_t count = static_cast<std::size_t>(n_max) * n_max;
  rep.pair_valid.assign(count, false);
  rep.pair_satisfied.assign(count, false);
  rep.all_valid_satisfied = true;

  for (int m = 1; m <= n_max; ++m) {
    for (int n = 1; n <= n_max; ++n) {
      const std::size_t i = rep.idx(m, n);
      const bool valid = idx_valid[m] && idx_valid[n];
      rep.pair_valid[i] = valid;
      double me = 0.0;
      if ((m + n) % 2 == 1)
        me = 2.0 * std::abs(params.gamma) * std::abs(psi_b[m] * psi_b[n]);
      const double bound =
          rep.M_const * std::pow(m, -rep.alpha) * std::pow(n, -rep.alpha);
      const bool sat = me <= bound * (1.0 + 1e-12) + 1e-300;
      rep.pair_satisfied[i] = sat;
      if (valid && !sat) rep.all_valid_satisfied = false;
    }
  }
  return rep;
}

}  // namespace ptspec

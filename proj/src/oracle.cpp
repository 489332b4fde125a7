#include "ptspec/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ptspec/errors.hpp"
#include "ptspec/oscillator_basis.hpp"

namespace ptspec {

namespace {

// Tail sums S_p(lam) = sum_{m > dim, m % 2 == p} psi_m(b)^2 / (2m+1-lam),
// streamed recurrence up to m_tail plus the closed-form smooth remainder
// from the mean WKB amplitude psi_m(b)^2 ~ (1/pi) (2m+1-b^2)^{-1/2}.
std::array<double, 2> tail_sums(double b, int dim, double lam, long m_tail) {
  std::array<double, 2> S{0.0, 0.0};
  // run the recurrence from scratch; cheap relative to the eigensolve
  double prev = 0.0;
  double cur = 0.7511255444649425 * std::exp(-0.5 * b * b);  // psi_0(b)
  for (long m = 0; m < m_tail; ++m) {
    const double next =
        b * std::sqrt(2.0 / (m + 1)) * cur - std::sqrt(m / (m + 1.0)) * prev;
    prev = cur;
    cur = next;
    const long mm = m + 1;
    if (mm > dim) S[mm % 2] += cur * cur / (2.0 * mm + 1.0 - lam);
  }
  const double vM = std::sqrt(2.0 * m_tail + 1.0 - b * b);
  const double d = lam - b * b;
  double J;
  if (d > 0.0) {
    const double c = std::sqrt(d);
    J = 0.5 / c * std::log((vM + c) / (vM - c));
  } else if (d < 0.0) {
    const double a = std::sqrt(-d);
    J = (std::numbers::pi / 2.0 - std::atan(vM / a)) / a;
  } else {
    J = 1.0 / vM;
  }
  const double smooth = 0.5 * J / std::numbers::pi;  // half the m's per parity
  S[0] += smooth;
  S[1] += smooth;
  return S;
}

Eigen::MatrixXcd corrected_matrix(const ProblemParams& params, int dim, double lam,
                                  long m_tail) {
  TruncatedHamiltonian H = build(params, dim);
  const auto S = tail_sums(params.b, dim - 1, lam, m_tail);
  const std::vector<double> psi_b = eval_oscillator_fn_upto(dim - 1, params.b);
  const double g2 = 4.0 * params.gamma * params.gamma;
  for (int j = 0; j < dim; ++j) {
    const double Sj = S[(j + 1) % 2];  // coupled tail modes have opposite parity
    for (int k = j % 2; k < dim; k += 2)
      H.entries(j, k) += g2 * psi_b[j] * psi_b[k] * Sj;
  }
  return H.entries;
}

std::vector<Complex> solve_all(const Eigen::MatrixXcd& M) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw NoConvergenceQR("oracle: QR iteration did not converge");
  std::vector<Complex> ev(es.eigenvalues().data(),
                          es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& z) {
    if (a.real() != z.real()) return a.real() < z.real();
    return a.imag() < z.imag();
  });
  return ev;
}

}  // namespace

TruncatedHamiltonian build(const ProblemParams& params, int dim) {
  if (dim < 2) throw ConfigError("oracle build: dim must be >= 2");
  TruncatedHamiltonian H;
  H.dim = dim;
  H.entries = Eigen::MatrixXcd::Zero(dim, dim);
  const std::vector<double> psi_b = eval_oscillator_fn_upto(dim - 1, params.b);
  for (int m = 0; m < dim; ++m) {
    H.entries(m, m) = Complex(2.0 * m + 1.0, 0.0);
    for (int n = m + 1; n < dim; n += 1) {
      if ((m + n) % 2 == 0) continue;
      const Complex me(0.0, 2.0 * params.gamma * psi_b[m] * psi_b[n]);
      H.entries(m, n) = me;
      H.entries(n, m) = me;  // complex symmetric, no conjugation
    }
  }
  return H;
}

std::vector<Complex> eigenvalues(const TruncatedHamiltonian& H) {
  if (H.dim > 400) throw ConfigError("oracle eigenvalues: dim > 400");
  return solve_all(H.entries);
}

Complex eigenvalue_near(const ProblemParams& params, int dim, double mu_ref,
                        long m_tail) {
  const auto ev = solve_all(corrected_matrix(params, dim, mu_ref, m_tail));
  Complex best = ev.front();
  for (const Complex& e : ev)
    if (std::abs(e - mu_ref) < std::abs(best - mu_ref)) best = e;
  return best;
}

std::vector<Complex> corrected_lowest(const ProblemParams& params, int dim, int count) {
  std::vector<Complex> out;
  out.reserve(count);
  for (int n = 0; n < count; ++n)
    out.push_back(eigenvalue_near(params, dim, 2.0 * n + 1.0));
  std::sort(out.begin(), out.end(), [](const Complex& a, const Complex& z) {
    if (a.real() != z.real()) return a.real() < z.real();
    return a.imag() < z.imag();
  });
  return out;
}

double truncation_check(const ProblemParams& params, int dim, int probe_count) {
  if (dim < 40) throw ConfigError("truncation_check: dim must be >= 40");
  double drift = 0.0;
  for (int n = 0; n < probe_count; ++n) {
    const Complex a = eigenvalue_near(params, dim, 2.0 * n + 1.0);
    const Complex b = eigenvalue_near(params, dim + 40, 2.0 * n + 1.0);
    drift = std::max(drift, std::abs(a - b));
  }
  return drift;
}

double pair_coalescence_gamma(const ProblemParams& params_base, int dim, int n_a,
                              int n_b, double gamma_lo, double gamma_hi, double tol) {
  const double center = static_cast<double>(n_a + n_b + 1);
  const auto discriminant = [&](double gamma) {
    ProblemParams p = params_base;
    p.gamma = gamma;
    const auto ev = solve_all(corrected_matrix(p, dim, center, 2'000'000));
    // the tracked pair: two eigenvalues nearest the pair center in real part
    std::vector<Complex> sorted(ev);
    std::sort(sorted.begin(), sorted.end(), [&](const Complex& a, const Complex& z) {
      return std::abs(a.real() - center) < std::abs(z.real() - center);
    });
    const Complex d = (sorted[0] - sorted[1]) * (sorted[0] - sorted[1]);
    return d.real();
  };

  double lo = gamma_lo, hi = gamma_hi;
  double d_lo = discriminant(lo);
  double d_hi = discriminant(hi);
  if (!(d_lo > 0.0) || !(d_hi < 0.0))
    throw NotABranchPoint("pair_coalescence_gamma: discriminant does not change sign in [" +
                          std::to_string(gamma_lo) + ", " + std::to_string(gamma_hi) + "]");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (discriminant(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

ShootingState oracle_seed(const ProblemParams& params, int dim, int n_label) {
  const double mu_ref = 2.0 * n_label + 1.0;
  const Eigen::MatrixXcd M = corrected_matrix(params, dim, mu_ref, 2'000'000);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success)
    throw NoConvergenceQR("oracle_seed: QR iteration did not converge");
  int best = 0;
  for (int i = 1; i < dim; ++i)
    if (std::abs(es.eigenvalues()(i) - mu_ref) < std::abs(es.eigenvalues()(best) - mu_ref))
      best = i;
  const Eigen::VectorXcd c = es.eigenvectors().col(best);  // unit Euclidean norm

  Complex psi0(0.0, 0.0), dpsi0(0.0, 0.0);
  for (int k = 0; k < dim; ++k) {
    const auto fd = eval_oscillator_fn_and_derivative(k, 0.0);
    psi0 += c(k) * fd.value;
    dpsi0 += c(k) * fd.derivative;
  }
  // global phase: rotate onto Im psi(0) = 0 (or psi'(0) imaginary for
  // odd-dominated states where psi(0) ~ 0)
  Complex rot(1.0, 0.0);
  if (std::abs(psi0) > 1e-8)
    rot = std::polar(1.0, -std::arg(psi0));
  else if (std::abs(dpsi0) > 0.0)
    rot = std::polar(1.0, std::numbers::pi / 2.0 - std::arg(dpsi0));
  psi0 *= rot;
  dpsi0 *= rot;

  ShootingState s;
  s.n_label = n_label;
  s.re_psi0 = psi0.real();
  s.re_dpsi0 = dpsi0.real();
  s.im_dpsi0 = dpsi0.imag();
  s.re_mu = es.eigenvalues()(best).real();
  s.im_mu = es.eigenvalues()(best).imag();
  return s;
}

}  // namespace ptspec

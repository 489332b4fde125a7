#include "ptspec/shooting.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "ptspec/errors.hpp"
#include "ptspec/oscillator_basis.hpp"

namespace ptspec {

namespace {

struct Mesh {
  double h_target;
  double x_max;
};

Mesh frozen_mesh(const ShootingState& seed, const ProblemParams& params,
                 const SolveOptions& opts) {
  Mesh m;
  m.h_target = opts.h_target > 0.0 ? opts.h_target : default_step_target(seed.re_mu);
  m.x_max = opts.x_max_override > 0.0 ? opts.x_max_override
                                      : params.effective_x_max(seed.re_mu);
  return m;
}

std::array<double, 5> residual_on_mesh(const ShootingState& s,
                                       const ProblemParams& params, const Mesh& mesh,
                                       IntegrationResult* plus_out = nullptr,
                                       IntegrationResult* minus_out = nullptr,
                                       int record_every = 0) {
  const double kap2 = mesh.x_max * mesh.x_max - s.re_mu;
  if (kap2 < 1.0)
    throw OverflowError("residual: no decay region at x_max (Re mu too large)");
  const double kap = std::sqrt(kap2);

  ProblemParams p = params;
  p.x_max = mesh.x_max;
  IntegrationSettings is;
  is.h_target = mesh.h_target;
  is.record_every = record_every;

  const WaveState init{0.0, {s.re_psi0, 0.0}, {s.re_dpsi0, s.im_dpsi0}};
  const IntegrationResult rp = integrate_half_line(init, Direction::plus, s.mu(), p, is);
  const IntegrationResult rm = integrate_half_line(init, Direction::minus, s.mu(), p, is);

  const double m0 = std::max(
      std::sqrt(std::norm(init.psi) + std::norm(init.dpsi) / std::max(s.re_mu, 1.0)),
      1e-30);
  const double scale =
      std::sqrt(kap) * std::exp(std::min(wkb_growth_exponent(s.re_mu, mesh.x_max), 600.0)) * m0;

  const Complex r_plus = (rp.terminal.dpsi + kap * rp.terminal.psi) / scale;
  const Complex r_minus = (rm.terminal.dpsi - kap * rm.terminal.psi) / scale;
  const double norm_total = rp.norm_contribution + rm.norm_contribution;

  if (plus_out) *plus_out = rp;
  if (minus_out) *minus_out = rm;
  return {r_plus.real(), r_plus.imag(), r_minus.real(), r_minus.imag(),
          norm_total - 1.0};
}

double norm2(const Eigen::VectorXd& v) { return v.norm(); }

// Equilibrated square solve with a Moore-Penrose fallback past condition 1e14.
Eigen::VectorXd newton_step(Eigen::MatrixXd J, Eigen::VectorXd r, bool& used_pinv) {
  const int n = static_cast<int>(r.size());
  for (int i = 0; i < n; ++i) {
    const double sc = std::max(J.row(i).cwiseAbs().maxCoeff(), 1e-300);
    J.row(i) /= sc;
    r(i) /= sc;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(n - 1);
  if (!(smax > 0.0 && smin > smax / 1e14)) {
    used_pinv = true;  // rank-deficient: truncated-SVD (Moore-Penrose) step
    svd.setThreshold(1e-14);
  }
  return svd.solve(-r);
}

using ResidualFn = std::function<Eigen::VectorXd(const ShootingState&)>;

struct PhaseResult {
  ShootingState state;
  double residual_norm;
  int iterations;
  bool converged;
  bool used_pinv;
};

// Damped Newton over the unknown components listed in `active`.
PhaseResult newton_phase(ShootingState s, const std::vector<int>& active,
                         const ResidualFn& fn, double tol, const SolveOptions& opts) {
  const auto add = [](ShootingState& st, int i, double v) {
    switch (i) {
      case 0: st.re_psi0 += v; break;
      case 1: st.re_dpsi0 += v; break;
      case 2: st.im_dpsi0 += v; break;
      case 3: st.re_mu += v; break;
      default: st.im_mu += v; break;
    }
  };

  PhaseResult out{s, 0.0, 0, false, false};
  const int m = static_cast<int>(active.size());

  for (int it = 0; it < opts.max_iterations; ++it) {
    Eigen::VectorXd r;
    try {
      r = fn(s);
    } catch (const OverflowError&) {
      out.state = s;
      out.residual_norm = std::numeric_limits<double>::infinity();
      out.iterations = it;
      return out;
    }
    const double nr = norm2(r);
    if (nr < tol) {
      out.state = s;
      out.residual_norm = nr;
      out.iterations = it;
      out.converged = true;
      return out;
    }

    Eigen::MatrixXd J(r.size(), m);
    bool fd_ok = true;
    for (int jj = 0; jj < m; ++jj) {
      ShootingState sp = s;
      add(sp, active[jj], opts.fd_step);
      try {
        J.col(jj) = (fn(sp) - r) / opts.fd_step;
      } catch (const OverflowError&) {
        fd_ok = false;
        break;
      }
    }
    if (!fd_ok) {
      out.state = s;
      out.residual_norm = nr;
      out.iterations = it;
      return out;
    }

    bool pinv = false;
    const Eigen::VectorXd d = newton_step(J, r, pinv);
    out.used_pinv = out.used_pinv || pinv;

    double lam = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      ShootingState st = s;
      for (int jj = 0; jj < m; ++jj) add(st, active[jj], lam * d(jj));
      try {
        const Eigen::VectorXd rt = fn(st);
        if (norm2(rt) < (1.0 - 1e-4 * lam) * nr) {
          s = st;
          accepted = true;
          break;
        }
      } catch (const OverflowError&) {
        // rejected step
      }
      lam *= 0.5;
    }
    if (!accepted) {
      out.state = s;
      out.residual_norm = nr;
      out.iterations = it;
      return out;  // stalled
    }
  }
  Eigen::VectorXd r = fn(s);
  out.state = s;
  out.residual_norm = norm2(r);
  out.iterations = opts.max_iterations;
  out.converged = out.residual_norm < tol;
  return out;
}

int largest_ic_component(const ShootingState& s) {
  const double a0 = std::abs(s.re_psi0);
  const double a1 = std::abs(s.re_dpsi0);
  const double a2 = std::abs(s.im_dpsi0);
  if (a0 >= a1 && a0 >= a2) return 0;
  return a1 >= a2 ? 1 : 2;
}

}  // namespace

std::array<double, 5> residual(const ShootingState& state, const ProblemParams& params,
                               const SolveOptions& opts) {
  return residual_on_mesh(state, params, frozen_mesh(state, params, opts));
}

SpectralPoint solve(const ShootingState& seed, const ProblemParams& params,
                    const SolveOptions& opts) {
  params.validate(seed.re_mu);
  const Mesh mesh = frozen_mesh(seed, params, opts);

  const ResidualFn full = [&](const ShootingState& st) {
    const auto a = residual_on_mesh(st, params, mesh);
    return Eigen::Map<const Eigen::VectorXd>(a.data(), 5).eval();
  };
  const ResidualFn decay_only = [&](const ShootingState& st) {
    const auto a = residual_on_mesh(st, params, mesh);
    return Eigen::Map<const Eigen::VectorXd>(a.data(), 4).eval();
  };

  // Stage 1: decay equations with the dominant amplitude component frozen.
  // Off the eigenvalue the norm integral is swamped by the square of the
  // growing mode; driving the decay residuals first removes it.
  std::vector<int> active;
  const int frozen = largest_ic_component(seed);
  for (int i = 0; i < 5; ++i)
    if (i != frozen) active.push_back(i);
  PhaseResult a = newton_phase(seed, active, decay_only, 1e-12, opts);

  // Stage 2 (linear case): scaling is exact, land on N = 1 directly.
  ShootingState s = a.state;
  if (params.g == 0.0) {
    try {
      const auto r = residual_on_mesh(s, params, mesh);
      const double N = r[4] + 1.0;
      if (N > 0.0 && std::isfinite(N)) {
        const double c = 1.0 / std::sqrt(N);
        s.re_psi0 *= c;
        s.re_dpsi0 *= c;
        s.im_dpsi0 *= c;
      }
    } catch (const OverflowError&) {
      // keep unscaled state; the full stage decides
    }
  }

  // Stage 3: full five-by-five system including the norm equation.
  PhaseResult b = newton_phase(s, {0, 1, 2, 3, 4}, full, opts.tol, opts);
  if (!b.converged)
    throw NoConvergence("shooting solve did not reach tolerance (label " +
                            std::to_string(seed.n_label) + ", residual " +
                            std::to_string(b.residual_norm) + ")",
                        b.residual_norm);

  SpectralPoint pt;
  pt.n_label = seed.n_label;
  pt.state = b.state;
  pt.state.n_label = seed.n_label;
  pt.mu = b.state.mu();
  pt.params = params;
  pt.params.x_max = mesh.x_max;
  pt.residual_norm = b.residual_norm;
  pt.used_pseudoinverse = a.used_pinv || b.used_pinv;
  pt.iterations = a.iterations + b.iterations;
  if (opts.record_wavefunction) {
    IntegrationResult rp, rm;
    residual_on_mesh(b.state, params, mesh, &rp, &rm, 16);
    pt.wavefunction_samples.reserve(rp.samples.size() + rm.samples.size());
    for (auto it = rm.samples.rbegin(); it != rm.samples.rend(); ++it)
      pt.wavefunction_samples.push_back(*it);
    for (std::size_t i = 1; i < rp.samples.size(); ++i)
      pt.wavefunction_samples.push_back(rp.samples[i]);
  }
  return pt;
}

SpectralPoint solve_real(const ShootingState& seed, const ProblemParams& params,
                         const SolveOptions& opts) {
  params.validate(seed.re_mu);
  const Mesh mesh = frozen_mesh(seed, params, opts);

  const ResidualFn real_sys = [&](const ShootingState& st) {
    const auto a = residual_on_mesh(st, params, mesh);
    Eigen::VectorXd v(3);
    v << a[0], a[2], a[4];
    return v;
  };
  const ResidualFn real_decay = [&](const ShootingState& st) {
    const auto a = residual_on_mesh(st, params, mesh);
    Eigen::VectorXd v(2);
    v << a[0], a[2];
    return v;
  };

  ShootingState seed_r = seed;
  seed_r.im_dpsi0 = 0.0;
  seed_r.im_mu = 0.0;

  const int frozen = std::abs(seed_r.re_psi0) >= std::abs(seed_r.re_dpsi0) ? 0 : 1;
  std::vector<int> active_decay;
  for (int i : {0, 1, 3})
    if (i != frozen) active_decay.push_back(i);
  PhaseResult a = newton_phase(seed_r, active_decay, real_decay, 1e-12, opts);

  ShootingState s = a.state;
  if (params.g == 0.0) {
    try {
      const auto r = residual_on_mesh(s, params, mesh);
      const double N = r[4] + 1.0;
      if (N > 0.0 && std::isfinite(N)) {
        const double c = 1.0 / std::sqrt(N);
        s.re_psi0 *= c;
        s.re_dpsi0 *= c;
      }
    } catch (const OverflowError&) {
    }
  }

  PhaseResult b = newton_phase(s, {0, 1, 3}, real_sys, opts.tol, opts);
  if (!b.converged)
    throw NoConvergence("real shooting solve did not reach tolerance (label " +
                            std::to_string(seed.n_label) + ", residual " +
                            std::to_string(b.residual_norm) + ")",
                        b.residual_norm);

  SpectralPoint pt;
  pt.n_label = seed.n_label;
  pt.state = b.state;
  pt.state.n_label = seed.n_label;
  pt.mu = b.state.mu();
  pt.params = params;
  pt.params.x_max = mesh.x_max;
  pt.residual_norm = b.residual_norm;
  pt.used_pseudoinverse = a.used_pinv || b.used_pinv;
  pt.iterations = a.iterations + b.iterations;
  return pt;
}

ShootingState unperturbed_seed(int n) {
  ShootingState s;
  s.n_label = n;
  s.re_mu = 2.0 * n + 1.0;
  s.im_mu = 0.0;
  if (n % 2 == 0) {
    s.re_psi0 = eval_oscillator_fn(n, 0.0);
    s.re_dpsi0 = 0.0;
    s.im_dpsi0 = 0.0;
  } else {
    // odd level rotated by i into the PT gauge: psi(0) = 0, psi'(0) imaginary
    s.re_psi0 = 0.0;
    s.re_dpsi0 = 0.0;
    s.im_dpsi0 = std::sqrt(2.0 * n) * eval_oscillator_fn(n - 1, 0.0);
  }
  return s;
}

ShootingState conjugate_state(const ShootingState& state) {
  ShootingState c = state;
  c.re_dpsi0 = -state.re_dpsi0;
  c.im_mu = -state.im_mu;
  return c;
}

}  // namespace ptspec

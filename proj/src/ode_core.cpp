#include "ptspec/ode_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ptspec/errors.hpp"

namespace ptspec {

double default_step_target(double mu_re) {
  return std::min(1e-3, 6.6e-3 / std::sqrt(std::max(mu_re, 1.0)));
}

double wkb_growth_exponent(double mu_re, double X) {
  const auto F = [mu_re](double t) {
    const double kap2 = t * t - mu_re;
    const double kap = std::sqrt(std::max(kap2, 0.0));
    return 0.5 * t * kap - 0.5 * mu_re * std::log(std::max(t + kap, 1e-300));
  };
  const double xt = std::sqrt(std::max(mu_re, 0.0));
  if (X <= xt) return 0.0;
  return F(X) - F(xt);
}

WaveState apply_delta_jump(const WaveState& state, const ProblemParams& params) {
  WaveState out = state;
  out.dpsi += Complex(0.0, params.gamma) * state.psi;
  return out;
}

IntegrationResult integrate_half_line(const WaveState& initial, Direction dir,
                                      Complex mu, const ProblemParams& params,
                                      const IntegrationSettings& settings) {
  if (initial.x != 0.0)
    throw ConfigError("integrate_half_line: initial state must sit at x = 0");

  const double h_target =
      settings.h_target > 0.0 ? settings.h_target : default_step_target(mu.real());
  const int jump_index = static_cast<int>(std::ceil(params.b / h_target));
  const double h = params.b / jump_index;
  if (std::abs(jump_index * h - params.b) > 1e-12 * params.b)
    throw StepMisaligned("integrate_half_line: mesh misses b");

  const double x_max = params.effective_x_max(mu.real());
  int steps = static_cast<int>(std::ceil(x_max / h));
  if (steps % 2 != 0) ++steps;  // composite Simpson needs an even panel count

  // Runaway guard: legitimate trajectories grow at most like the WKB
  // amplitude of the dominant branch times the initial magnitude.
  const double init_mag = std::max(std::abs(initial.psi), std::abs(initial.dpsi));
  const double growth =
      std::exp(std::min(wkb_growth_exponent(mu.real(), x_max), 500.0));
  const double guard =
      std::min(settings.overflow_factor * std::max(init_mag, 1e-3) * growth, 1e250);

  const double sign = dir == Direction::plus ? 1.0 : -1.0;
  const double hs = sign * h;
  const double g = params.g;

  Complex psi = initial.psi;
  Complex dpsi = initial.dpsi;

  IntegrationResult res;
  res.max_magnitude = std::abs(psi);
  double norm = std::norm(psi);  // Simpson weight 1 at the first node
  if (settings.record_every > 0) res.samples.push_back({0.0, psi});

  const auto accel = [g, mu](double x, const Complex& p) {
    return (x * x + g * std::norm(p) - mu) * p;
  };

  for (int k = 0; k < steps; ++k) {
    const double x0 = k * hs;
    const Complex k1p = dpsi;
    const Complex k1d = accel(x0, psi);
    const Complex k2p = dpsi + 0.5 * hs * k1d;
    const Complex k2d = accel(x0 + 0.5 * hs, psi + 0.5 * hs * k1p);
    const Complex k3p = dpsi + 0.5 * hs * k2d;
    const Complex k3d = accel(x0 + 0.5 * hs, psi + 0.5 * hs * k2p);
    const Complex k4p = dpsi + hs * k3d;
    const Complex k4d = accel(x0 + hs, psi + hs * k3p);
    psi += hs / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    dpsi += hs / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);

    const double mag = std::abs(psi);
    if (!(mag < guard) || !std::isfinite(dpsi.real()) || !std::isfinite(dpsi.imag()))
      throw OverflowError("integrate_half_line: |psi| exceeded guard at x = " +
                          std::to_string((k + 1) * hs));
    res.max_magnitude = std::max(res.max_magnitude, mag);

    const double w = (k == steps - 1) ? 1.0 : (k % 2 == 0 ? 4.0 : 2.0);
    norm += w * std::norm(psi);

    if (k + 1 == jump_index) {
      // outward crossing of the delta at sign*b
      dpsi += Complex(0.0, params.gamma) * psi;
    }
    if (settings.record_every > 0 && (k + 1) % settings.record_every == 0)
      res.samples.push_back({(k + 1) * hs, psi});
  }

  res.terminal = {steps * hs, psi, dpsi};
  res.norm_contribution = norm * h / 3.0;
  return res;
}

}  // namespace ptspec

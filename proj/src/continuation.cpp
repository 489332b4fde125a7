#include "ptspec/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <string>

#include "ptspec/errors.hpp"
#include "ptspec/parallel.hpp"

namespace ptspec {

namespace {

constexpr double kDistinctPair = 1e-6;  // two reals count as separate roots

struct Live {
  enum class Mode { real, pair_pos, pair_neg, lost };
  int label = -1;
  Mode mode = Mode::real;
  int partner = -1;  // index into the live array while in a pair mode
  std::deque<std::pair<double, ShootingState>> history;  // last two accepted
  ContinuationPath path;

  void accept(double gamma, const SpectralPoint& pt) {
    path.points.push_back({gamma, pt.mu, pt.residual_norm, pt.state});
    history.push_back({gamma, pt.state});
    if (history.size() > 2) history.pop_front();
  }
  void reset_history(double gamma, const ShootingState& s) {
    history.clear();
    history.push_back({gamma, s});
  }
};

ShootingState extrapolate(const std::deque<std::pair<double, ShootingState>>& h,
                          double gamma_next) {
  if (h.size() == 1) return h.back().second;
  const auto& [g0, s0] = h.front();
  const auto& [g1, s1] = h.back();
  const double t = (gamma_next - g1) / (g1 - g0);
  ShootingState s = s1;
  s.re_psi0 += t * (s1.re_psi0 - s0.re_psi0);
  s.re_dpsi0 += t * (s1.re_dpsi0 - s0.re_dpsi0);
  s.im_dpsi0 += t * (s1.im_dpsi0 - s0.im_dpsi0);
  s.re_mu += t * (s1.re_mu - s0.re_mu);
  s.im_mu += t * (s1.im_mu - s0.im_mu);
  return s;
}

std::optional<SpectralPoint> try_solve(const ShootingState& seed,
                                       const ProblemParams& params,
                                       const SolveOptions& sopts) {
  try {
    return solve(seed, params, sopts);
  } catch (const NoConvergence&) {
    return std::nullopt;
  } catch (const OverflowError&) {
    return std::nullopt;
  }
}

SolveOptions solver_options(const SweepOptions& opts) {
  SolveOptions s;
  s.h_target = opts.h_target;
  return s;
}

ProblemParams at_gamma_params(const ProblemParams& base, double gamma) {
  ProblemParams p = base;
  p.gamma = gamma;
  return p;
}

// Flip a complex-branch state onto the requested sign of Im mu.
ShootingState with_im_sign(const ShootingState& s, bool positive) {
  if ((s.im_mu >= 0.0) == positive) return s;
  return conjugate_state(s);
}

double fit_beta_exponent(const std::vector<double>& dgamma,
                         const std::vector<double>& im_abs) {
  // least-squares slope of log|Im mu| against log(dgamma)
  const std::size_t n = dgamma.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(dgamma[i]);
    const double y = std::log(im_abs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct BisectDeps {
  const ProblemParams& base;
  const SweepOptions& opts;
  SolveOptions sopts;
};

// Coalescence bisection: below gamma_c two distinct real roots continue from
// (state_a, state_b); above it only the conjugate pair exists.
BranchPoint bisect_coalescence(ShootingState real_a, ShootingState real_b,
                               double gamma_lo, double gamma_hi,
                               ShootingState complex_hint, const BisectDeps& dep) {
  double lo = gamma_lo, hi = gamma_hi;
  ShootingState cpx = complex_hint;
  Complex mu_c_est = 0.5 * (real_a.mu() + real_b.mu());
  double last_gap = std::abs(real_a.mu() - real_b.mu());
  while (hi - lo > dep.opts.branch_tol) {
    const double mid = 0.5 * (lo + hi);
    const ProblemParams p = at_gamma_params(dep.base, mid);
    auto ra = try_solve(real_a, p, dep.sopts);
    auto rb = try_solve(real_b, p, dep.sopts);
    const bool real_side = ra && rb && std::abs(ra->mu.imag()) <= dep.opts.im_threshold &&
                           std::abs(rb->mu.imag()) <= dep.opts.im_threshold &&
                           std::abs(ra->mu - rb->mu) > kDistinctPair;
    if (real_side) {
      lo = mid;
      real_a = ra->state;
      real_b = rb->state;
      mu_c_est = 0.5 * (ra->mu + rb->mu);
      last_gap = std::abs(ra->mu - rb->mu);
    } else {
      hi = mid;
      auto rc = try_solve(cpx, p, dep.sopts);
      if (rc && std::abs(rc->mu.imag()) > dep.opts.im_threshold) cpx = rc->state;
    }
  }
  // at a genuine exceptional point the real pair closes like sqrt(gamma_c - g)
  if (last_gap > 0.05)
    throw NotABranchPoint("pair gap " + std::to_string(last_gap) +
                          " did not close near gamma = " + std::to_string(lo) +
                          " (mispaired levels or avoided crossing)");

  BranchPoint bp;
  bp.gamma_c = 0.5 * (lo + hi);
  bp.mu_c = Complex(mu_c_est.real(), 0.0);
  bp.kind = BranchKind::coalescence;
  bp.partner_labels = {std::min(real_a.n_label, real_b.n_label),
                       std::max(real_a.n_label, real_b.n_label)};

  if (dep.opts.fit_beta) {
    std::vector<double> dg, im;
    ShootingState seed = cpx;
    for (const double d : {1e-3, 2e-3, 4e-3, 8e-3}) {
      const double gamma = bp.gamma_c + d;
      auto r = try_solve(seed, at_gamma_params(dep.base, gamma), dep.sopts);
      if (r && std::abs(r->mu.imag()) > dep.opts.im_threshold) {
        dg.push_back(d);
        im.push_back(std::abs(r->mu.imag()));
        seed = r->state;
      }
    }
    if (dg.size() < 3)
      throw NotABranchPoint("branch point at gamma = " + std::to_string(bp.gamma_c) +
                            ": too few complex samples for the exponent fit");
    bp.beta = fit_beta_exponent(dg, im);
    if (bp.beta < 0.4 || bp.beta > 0.6)
      throw NotABranchPoint("branch point at gamma = " + std::to_string(bp.gamma_c) +
                            ": exponent " + std::to_string(bp.beta) +
                            " outside [0.4, 0.6]");
  } else {
    bp.beta = 0.5;
  }
  return bp;
}

// Splitting bisection: conjugate pair below gamma_c, two reals above.
BranchPoint bisect_splitting(ShootingState pair_state, double gamma_lo,
                             double gamma_hi, const BisectDeps& dep) {
  double lo = gamma_lo, hi = gamma_hi;  // lo: complex side, hi: real side
  ShootingState cpx = pair_state;
  Complex mu_c_est = pair_state.mu();
  while (hi - lo > dep.opts.branch_tol) {
    const double mid = 0.5 * (lo + hi);
    auto r = try_solve(cpx, at_gamma_params(dep.base, mid), dep.sopts);
    if (r && std::abs(r->mu.imag()) > dep.opts.im_threshold) {
      lo = mid;
      cpx = r->state;
      mu_c_est = r->mu;
    } else {
      hi = mid;
    }
  }

  BranchPoint bp;
  bp.gamma_c = 0.5 * (lo + hi);
  bp.mu_c = Complex(mu_c_est.real(), 0.0);
  bp.kind = BranchKind::splitting;

  if (dep.opts.fit_beta) {
    std::vector<double> dg, im;
    ShootingState seed = cpx;
    for (const double d : {1e-3, 2e-3, 4e-3, 8e-3}) {
      const double gamma = bp.gamma_c - d;
      if (gamma <= gamma_lo) break;
      auto r = try_solve(seed, at_gamma_params(dep.base, gamma), dep.sopts);
      if (r && std::abs(r->mu.imag()) > dep.opts.im_threshold) {
        dg.push_back(d);
        im.push_back(std::abs(r->mu.imag()));
        seed = r->state;
      }
    }
    if (dg.size() < 3)
      throw NotABranchPoint("splitting at gamma = " + std::to_string(bp.gamma_c) +
                            ": too few complex samples for the exponent fit");
    bp.beta = fit_beta_exponent(dg, im);
    if (bp.beta < 0.4 || bp.beta > 0.6)
      throw NotABranchPoint("splitting at gamma = " + std::to_string(bp.gamma_c) +
                            ": exponent " + std::to_string(bp.beta) +
                            " outside [0.4, 0.6]");
  } else {
    bp.beta = 0.5;
  }
  return bp;
}

}  // namespace

const PathPoint* ContinuationPath::at_gamma(double gamma, double tol) const {
  for (const auto& p : points)
    if (std::abs(p.gamma - gamma) <= tol) return &p;
  return nullptr;
}

PathClass classify(const ContinuationPath& path, double im_threshold) {
  if (path.lost) return PathClass::undetermined;
  for (const auto& bp : path.branch_events)
    if (bp.kind == BranchKind::coalescence) return PathClass::fragile;
  double max_im = 0.0;
  for (const auto& p : path.points) max_im = std::max(max_im, std::abs(p.mu.imag()));
  if (max_im < im_threshold) return PathClass::robust;
  return PathClass::undetermined;
}

BranchPoint locate_branch_point(const ShootingState& state_a,
                                const ShootingState& state_b, double gamma_lo,
                                double gamma_hi, const ProblemParams& params,
                                const SweepOptions& opts) {
  if (!(gamma_hi > gamma_lo))
    throw NotABranchPoint("locate_branch_point: empty bracket");
  BisectDeps dep{params, opts, solver_options(opts)};

  auto ra = try_solve(state_a, at_gamma_params(params, gamma_lo), dep.sopts);
  auto rb = try_solve(state_b, at_gamma_params(params, gamma_lo), dep.sopts);
  if (!ra || !rb)
    throw NotABranchPoint("locate_branch_point: no solutions at the lower bracket edge");
  const bool lo_real = std::abs(ra->mu.imag()) <= opts.im_threshold &&
                       std::abs(rb->mu.imag()) <= opts.im_threshold &&
                       std::abs(ra->mu - rb->mu) > kDistinctPair;

  if (lo_real) {
    // expect coalescence: confirm the upper edge is not still two reals
    auto ha = try_solve(extrapolate({{gamma_lo, ra->state}}, gamma_hi),
                        at_gamma_params(params, gamma_hi), dep.sopts);
    ShootingState hint = ra->state;
    hint.im_mu = 0.3;
    if (ha && std::abs(ha->mu.imag()) > opts.im_threshold)
      hint = ha->state;
    else if (ha) {
      auto hb = try_solve(rb->state, at_gamma_params(params, gamma_hi), dep.sopts);
      if (hb && std::abs(hb->mu.imag()) <= opts.im_threshold &&
          std::abs(ha->mu - hb->mu) > kDistinctPair)
        throw NotABranchPoint("locate_branch_point: pair still real at the upper edge");
    }
    return bisect_coalescence(ra->state, rb->state, gamma_lo, gamma_hi, hint,
                              dep);
  }
  // splitting: lower edge carries the complex pair
  const ShootingState pair_state =
      std::abs(ra->mu.imag()) > opts.im_threshold ? ra->state : rb->state;
  return bisect_splitting(pair_state, gamma_lo, gamma_hi, dep);
}

std::vector<ShootingState> sweep_g(const std::vector<int>& n_labels, double g_target,
                                   const ProblemParams& params_base,
                                   const SweepOptions& opts) {
  if (g_target < 0.0) throw ConfigError("sweep_g: g_target must be >= 0");
  std::vector<ShootingState> out(n_labels.size());
  const SolveOptions sopts = solver_options(opts);

  parallel_for(
      n_labels.size(),
      [&](std::size_t i) {
        const int n = n_labels[i];
        ShootingState cur = unperturbed_seed(n);
        if (n % 2 == 1) {
          // real gauge for the g continuation: psi'(0) real
          cur.re_dpsi0 = cur.im_dpsi0;
          cur.im_dpsi0 = 0.0;
        }
        if (g_target == 0.0) {
          out[i] = cur;
          return;
        }
        const int steps = static_cast<int>(std::ceil(g_target / 0.5));
        std::deque<std::pair<double, ShootingState>> hist{{0.0, cur}};
        for (int k = 1; k <= steps; ++k) {
          const double g = g_target * k / steps;
          ProblemParams p = params_base;
          p.gamma = 0.0;
          p.g = g;
          ShootingState seed = extrapolate(hist, g);
          seed.n_label = n;
          SpectralPoint pt;
          try {
            pt = solve_real(seed, p, sopts);
          } catch (const NoConvergence& e) {
            throw PathLost("sweep_g: level " + std::to_string(n) +
                               " lost at g = " + std::to_string(g) + " (" + e.what() + ")",
                           g);
          }
          hist.push_back({g, pt.state});
          if (hist.size() > 2) hist.pop_front();
          cur = pt.state;
        }
        // back to the PT gauge for the gamma sweep: psi'(0) imaginary
        if (n % 2 == 1 || std::abs(cur.re_psi0) < 1e-10) {
          cur.im_dpsi0 = cur.re_dpsi0;
          cur.re_dpsi0 = 0.0;
        }
        out[i] = cur;
      },
      opts.threads);
  return out;
}

std::vector<ContinuationPath> sweep_gamma(const std::vector<int>& n_labels,
                                          const std::vector<double>& gamma_grid,
                                          const ProblemParams& params_base,
                                          const SweepOptions& opts) {
  if (gamma_grid.empty()) throw ConfigError("sweep_gamma: empty gamma grid");
  for (std::size_t k = 1; k < gamma_grid.size(); ++k)
    if (!(gamma_grid[k] > gamma_grid[k - 1]))
      throw ConfigError("sweep_gamma: gamma grid must be strictly increasing");
  if (!opts.initial_states.empty() && opts.initial_states.size() != n_labels.size())
    throw ConfigError("sweep_gamma: initial_states size mismatch");

  const SolveOptions sopts = solver_options(opts);
  const BisectDeps dep{params_base, opts, sopts};

  std::vector<Live> lives(n_labels.size());
  std::vector<ContinuationPath> detached;

  // seed and polish at the first grid point
  parallel_for(
      lives.size(),
      [&](std::size_t i) {
        Live& lv = lives[i];
        lv.label = n_labels[i];
        lv.path.n_label = n_labels[i];
        lv.path.g = params_base.g;
        lv.path.b = params_base.b;
        ShootingState seed = opts.initial_states.empty() ? unperturbed_seed(n_labels[i])
                                                         : opts.initial_states[i];
        seed.n_label = n_labels[i];
        const ProblemParams p0 = at_gamma_params(params_base, gamma_grid.front());
        auto r = try_solve(seed, p0, sopts);
        if (!r) {
          lv.mode = Live::Mode::lost;
          lv.path.lost = true;
          lv.path.lost_at_gamma = gamma_grid.front();
          return;
        }
        lv.accept(gamma_grid.front(), *r);
      },
      opts.threads);

  struct SliceResult {
    std::optional<SpectralPoint> point;
  };

  for (std::size_t k = 1; k < gamma_grid.size(); ++k) {
    const double gamma = gamma_grid[k];
    const ProblemParams p = at_gamma_params(params_base, gamma);

    std::vector<SliceResult> results(lives.size());
    parallel_for(
        lives.size(),
        [&](std::size_t i) {
          Live& lv = lives[i];
          if (lv.mode == Live::Mode::lost) return;
          ShootingState seed = extrapolate(lv.history, gamma);
          seed.n_label = lv.label;
          results[i].point = try_solve(seed, p, sopts);
        },
        opts.threads);

    // serial event handling in label order keeps the sweep deterministic
    std::vector<bool> done(lives.size(), false);

    const auto mark_lost = [&](Live& lv) {
      lv.mode = Live::Mode::lost;
      lv.path.lost = true;
      lv.path.lost_at_gamma = gamma;
    };

    const auto is_real = [&](const SpectralPoint& pt) {
      return std::abs(pt.mu.imag()) <= opts.im_threshold;
    };

    // Local refinement marching toward `gamma`. Returns true when the step
    // completes on the current branch type; false when the path was lost or
    // a branch transition surfaced (stored into results for the caller).
    const auto march = [&](Live& lv) -> bool {
      const bool want_real = lv.mode == Live::Mode::real;
      double from = lv.history.back().first;
      int rounds = 0;
      double step = (gamma - from) / 2.0;
      while (from < gamma - 1e-15) {
        const double target = std::min(from + step, gamma);
        ShootingState seed = extrapolate(lv.history, target);
        seed.n_label = lv.label;
        auto r = try_solve(seed, at_gamma_params(params_base, target), sopts);
        if (r && is_real(*r) == want_real) {
          lv.accept(target, *r);
          from = target;
          continue;
        }
        if (r) {
          // branch transition inside the refined interval
          results[static_cast<std::size_t>(&lv - lives.data())].point = r;
          return false;
        }
        if (++rounds > opts.refine_rounds) {
          mark_lost(lv);
          return false;
        }
        step /= 2.0;
      }
      return true;
    };

    for (std::size_t i = 0; i < lives.size(); ++i) {
      Live& lv = lives[i];
      if (done[i] || lv.mode == Live::Mode::lost) continue;
      auto& res = results[i].point;

      if (lv.mode == Live::Mode::real) {
        bool transition = false;
        if (res && is_real(*res)) {
          const Complex prev_mu = lv.path.points.back().mu;
          const bool wants_refine = std::abs(res->mu - prev_mu) > opts.refine_jump ||
                                    res->iterations > opts.refine_iterations;
          if (wants_refine && gamma - lv.history.back().first > 4.0 * opts.branch_tol) {
            if (march(lv)) {
              done[i] = true;
              continue;
            }
            if (lv.mode == Live::Mode::lost) continue;
            transition = res && !is_real(*res);
          } else {
            lv.accept(gamma, *res);
            done[i] = true;
            continue;
          }
        } else if (!res) {
          if (march(lv)) {
            done[i] = true;
            continue;
          }
          if (lv.mode == Live::Mode::lost) continue;
          transition = res && !is_real(*res);
        } else {
          transition = true;  // direct complex convergence
        }
        if (!transition) continue;

        // coalescence: this real path converged onto a complex branch
        const SpectralPoint cpx = *res;

        // partner: prefer a real path whose slice result conjugates ours
        int partner = -1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < lives.size(); ++j) {
          if (j == i || lives[j].mode != Live::Mode::real || lives[j].history.empty())
            continue;
          double score = std::numeric_limits<double>::infinity();
          if (results[j].point && std::abs(results[j].point->mu.imag()) > opts.im_threshold)
            score = std::abs(results[j].point->mu - std::conj(cpx.mu));
          else
            score = 1e3 + std::abs(lives[j].path.points.back().mu -
                                   lv.path.points.back().mu);
          if (score < best) {
            best = score;
            partner = static_cast<int>(j);
          }
        }
        if (partner < 0) {
          mark_lost(lv);
          continue;
        }
        Live& pq = lives[partner];

        try {
          BranchPoint bp = bisect_coalescence(
              lv.history.back().second, pq.history.back().second,
              std::min(lv.history.back().first, pq.history.back().first), gamma,
              cpx.state, dep);
          bp.partner_labels = {std::min(lv.label, pq.label), std::max(lv.label, pq.label)};
          lv.path.branch_events.push_back(bp);
          pq.path.branch_events.push_back(bp);
        } catch (const NotABranchPoint&) {
          mark_lost(lv);
          mark_lost(pq);
          done[i] = done[partner] = true;
          continue;
        }

        const bool lv_positive = lv.label < pq.label;
        lv.mode = lv_positive ? Live::Mode::pair_pos : Live::Mode::pair_neg;
        pq.mode = lv_positive ? Live::Mode::pair_neg : Live::Mode::pair_pos;
        lv.partner = partner;
        pq.partner = static_cast<int>(i);

        const ShootingState s_pos = with_im_sign(cpx.state, true);
        const ShootingState s_neg = conjugate_state(s_pos);
        auto fix = [&](Live& who, const ShootingState& seed_state) {
          ShootingState sd = seed_state;
          sd.n_label = who.label;
          auto r = try_solve(sd, p, sopts);
          if (r) {
            who.reset_history(gamma, r->state);
            who.path.points.push_back({gamma, r->mu, r->residual_norm, r->state});
          } else {
            mark_lost(who);
          }
        };
        fix(lv, lv_positive ? s_pos : s_neg);
        fix(pq, lv_positive ? s_neg : s_pos);
        done[i] = done[partner] = true;
        continue;
      }

      // pair member marching
      if (lv.mode == Live::Mode::pair_pos || lv.mode == Live::Mode::pair_neg) {
        const bool positive = lv.mode == Live::Mode::pair_pos;
        if (res && !is_real(*res)) {
          SpectralPoint pt = *res;
          if ((pt.mu.imag() >= 0.0) != positive) {
            // landed on the partner branch; conjugate back
            ShootingState sd = conjugate_state(pt.state);
            sd.n_label = lv.label;
            auto r2 = try_solve(sd, p, sopts);
            if (r2 && !is_real(*r2)) pt = *r2;
          }
          lv.accept(gamma, pt);
          done[i] = true;
          continue;
        }

        // candidate splitting (back onto the real axis) or lost corrector
        if (!res) {
          if (march(lv)) {
            done[i] = true;
            continue;
          }
          if (lv.mode == Live::Mode::lost) continue;
          if (!res || !is_real(*res)) continue;
        }
        const SpectralPoint real_pt = *res;
        Live* partner = lv.partner >= 0 ? &lives[lv.partner] : nullptr;

        try {
          BranchPoint bp = bisect_splitting(lv.history.back().second,
                                            lv.history.back().first, gamma, dep);
          bp.partner_labels = {partner ? std::min(lv.label, partner->label) : lv.label,
                               partner ? std::max(lv.label, partner->label) : lv.label};
          lv.path.branch_events.push_back(bp);
          if (partner) partner->path.branch_events.push_back(bp);

          // the two real roots past the splitting: one is in hand, the other
          // is seeded by mirroring mu across the splitting value
          SpectralPoint lower = real_pt, upper = real_pt;
          ShootingState mirror = real_pt.state;
          mirror.re_mu = 2.0 * bp.mu_c.real() - real_pt.mu.real();
          mirror.im_mu = 0.0;
          auto r2 = try_solve(mirror, p, sopts);
          bool have_two = false;
          if (r2 && std::abs(r2->mu.imag()) <= opts.im_threshold &&
              std::abs(r2->mu - real_pt.mu) > kDistinctPair) {
            have_two = true;
            if (r2->mu.real() < real_pt.mu.real())
              lower = *r2;
            else
              upper = *r2;
          }
          Live* lo_owner = &lv;
          Live* hi_owner = partner;
          if (partner && partner->label < lv.label) std::swap(lo_owner, hi_owner);
          lo_owner->mode = Live::Mode::real;
          lo_owner->partner = -1;
          lo_owner->reset_history(gamma, lower.state);
          lo_owner->path.points.push_back(
              {gamma, lower.mu, lower.residual_norm, lower.state});
          if (hi_owner) {
            if (have_two) {
              hi_owner->mode = Live::Mode::real;
              hi_owner->partner = -1;
              hi_owner->reset_history(gamma, upper.state);
              hi_owner->path.points.push_back(
                  {gamma, upper.mu, upper.residual_norm, upper.state});
            } else {
              mark_lost(*hi_owner);
            }
            done[static_cast<std::size_t>(hi_owner - lives.data())] = true;
          }
          done[static_cast<std::size_t>(lo_owner - lives.data())] = true;
          continue;
        } catch (const NotABranchPoint&) {
          mark_lost(lv);
          if (partner) mark_lost(*partner);
          done[i] = true;
          if (partner) done[static_cast<std::size_t>(partner - lives.data())] = true;
          continue;
        }
      }
    }

    // conjugate-pair bookkeeping check: members must mirror each other
    for (std::size_t i = 0; i < lives.size(); ++i) {
      Live& lv = lives[i];
      if (lv.mode != Live::Mode::pair_pos || lv.partner < 0) continue;
      Live& pq = lives[lv.partner];
      if (pq.mode != Live::Mode::pair_neg) continue;
      if (lv.path.points.empty() || pq.path.points.empty()) continue;
      const auto& a = lv.path.points.back();
      const auto& b = pq.path.points.back();
      if (a.gamma == b.gamma && std::abs(a.mu - std::conj(b.mu)) > 100 * opts.im_threshold) {
        // partner drifted off the conjugate branch; re-anchor it
        ShootingState sd = conjugate_state(a.state);
        sd.n_label = pq.label;
        auto r = try_solve(sd, p, sopts);
        if (r) {
          pq.path.points.back() = {gamma, r->mu, r->residual_norm, r->state};
          pq.reset_history(gamma, r->state);
        }
      }
    }

    // nonlinear detached-branch probing (figure support)
    if (opts.probe_detached && params_base.g > 0.0) {
      for (std::size_t i = 0; i < lives.size(); ++i) {
        Live& lv = lives[i];
        if (lv.mode != Live::Mode::real || lv.path.points.empty()) continue;
        if (lv.path.points.back().gamma != gamma) continue;
        bool already = false;
        for (const auto& d : detached)
          if (d.n_label == lv.label && !d.points.empty() &&
              std::abs(d.points.back().gamma - gamma) < 1e-12)
            already = true;
        if (already) continue;
        ShootingState probe = lv.path.points.back().state;
        probe.im_mu = 0.25;
        auto r = try_solve(probe, p, sopts);
        if (r && std::abs(r->mu.imag()) > 1e-6 &&
            std::abs(r->mu - lv.path.points.back().mu) > 1e-6) {
          // march an existing detached path forward or open a new one
          bool extended = false;
          for (auto& d : detached) {
            if (d.n_label != lv.label || d.points.empty()) continue;
            if (std::abs(r->mu - d.points.back().mu) < 1.0) {
              d.points.push_back({gamma, r->mu, r->residual_norm, r->state});
              extended = true;
              break;
            }
          }
          if (!extended) {
            ContinuationPath dp;
            dp.n_label = lv.label;
            dp.g = params_base.g;
            dp.b = params_base.b;
            dp.detached_complex_branch = true;
            dp.points.push_back({gamma, r->mu, r->residual_norm, r->state});
            detached.push_back(std::move(dp));
          }
        }
      }
    }
  }

  std::vector<ContinuationPath> out;
  out.reserve(lives.size() + detached.size());
  for (auto& lv : lives) {
    lv.path.classification = classify(lv.path, opts.im_threshold);
    out.push_back(std::move(lv.path));
  }
  for (auto& d : detached) {
    d.classification = PathClass::undetermined;
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace ptspec

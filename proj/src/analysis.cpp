#include "ptspec/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ptspec/errors.hpp"

namespace ptspec {

namespace {

constexpr double kZeroShift = 1e-10;

struct XY {
  std::vector<double> x, y;  // log n, log shift
  std::vector<int> n;
};

// One point per level (conjugate partners coincide), zero shifts dropped.
XY loglog_points(const std::vector<ShiftRecord>& shifts, std::pair<int, int> n_range,
                 int* excluded_zero) {
  std::map<int, double> per_n;
  for (const auto& s : shifts) {
    if (s.n < std::max(n_range.first, 1) || s.n > n_range.second) continue;
    per_n.emplace(s.n, s.delta_mu_abs);
  }
  XY out;
  int zeros = 0;
  for (const auto& [n, d] : per_n) {
    if (d < kZeroShift) {
      ++zeros;
      continue;
    }
    out.n.push_back(n);
    out.x.push_back(std::log(static_cast<double>(n)));
    out.y.push_back(std::log(d));
  }
  if (excluded_zero) *excluded_zero = zeros;
  return out;
}

double r_squared_about(const std::vector<double>& y, const std::vector<double>& fit) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_tot += (y[i] - mean) * (y[i] - mean);
    ss_res += (y[i] - fit[i]) * (y[i] - fit[i]);
  }
  if (ss_tot <= 0.0) return 0.0;
  return std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
}

}  // namespace

std::string to_string(FitModel model) {
  switch (model) {
    case FitModel::power_law: return "power_law";
    case FitModel::half_inverse_bound: return "half_inverse_bound";
    default: return "log_over_n32";
  }
}

std::vector<ShiftRecord> compute_shifts(const std::vector<ContinuationPath>& paths,
                                        double at_gamma) {
  std::vector<ShiftRecord> out;
  for (const auto& path : paths) {
    if (path.detached_complex_branch) continue;
    const PathPoint* pt = path.at_gamma(at_gamma);
    if (!pt)
      throw MissingGamma("compute_shifts: path for level " +
                         std::to_string(path.n_label) + " has no grid point at gamma = " +
                         std::to_string(at_gamma));
    const double ref = 2.0 * path.n_label + 1.0;
    const bool cplx = std::abs(pt->mu.imag()) > 1e-8;
    out.push_back({path.n_label, std::abs(pt->mu - ref), cplx, false});
    if (cplx)  // record the conjugate member as well; moduli coincide
      out.push_back({path.n_label, std::abs(std::conj(pt->mu) - ref), cplx, false});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ShiftRecord& a, const ShiftRecord& z) { return a.n < z.n; });
  return out;
}

FitResult fit_shrink_rate(const std::vector<ShiftRecord>& shifts, FitModel model,
                          std::pair<int, int> n_range) {
  FitResult res;
  res.model = model;
  res.n_range = n_range;
  const XY pts = loglog_points(shifts, n_range, &res.excluded_zero);
  res.used_points = static_cast<int>(pts.x.size());
  if (res.used_points < 8)
    throw InsufficientData("fit_shrink_rate: " + std::to_string(res.used_points) +
                           " nonzero shifts in range (need 8)");

  const std::size_t m = pts.x.size();
  if (model == FitModel::power_law) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
      sx += pts.x[i];
      sy += pts.y[i];
      sxx += pts.x[i] * pts.x[i];
      sxy += pts.x[i] * pts.y[i];
    }
    const double denom = m * sxx - sx * sx;
    res.slope = (m * sxy - sx * sy) / denom;
    const double intercept = (sy - res.slope * sx) / m;
    res.amplitude = std::exp(intercept);
    std::vector<double> fit(m);
    for (std::size_t i = 0; i < m; ++i) fit[i] = intercept + res.slope * pts.x[i];
    res.r_squared = r_squared_about(pts.y, fit);
  } else if (model == FitModel::half_inverse_bound) {
    res.slope = -0.5;
    double c = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      c = std::max(c, std::exp(pts.y[i]) * std::sqrt(static_cast<double>(pts.n[i])));
    res.amplitude = c;
    std::vector<double> fit(m);
    for (std::size_t i = 0; i < m; ++i) fit[i] = std::log(c) - 0.5 * pts.x[i];
    res.r_squared = r_squared_about(pts.y, fit);
  } else {  // log_over_n32: amplitude-only fit of log(n)/n^{3/2}
    double acc = 0.0;
    std::vector<double> shape(m);
    for (std::size_t i = 0; i < m; ++i) {
      shape[i] = std::log(std::log(static_cast<double>(pts.n[i]))) - 1.5 * pts.x[i];
      acc += pts.y[i] - shape[i];
    }
    const double log_amp = acc / static_cast<double>(m);
    res.amplitude = std::exp(log_amp);
    res.slope = -1.5;
    std::vector<double> fit(m);
    for (std::size_t i = 0; i < m; ++i) fit[i] = log_amp + shape[i];
    res.r_squared = r_squared_about(pts.y, fit);
  }
  return res;
}

std::vector<ShiftRecord> detect_outliers(std::vector<ShiftRecord> shifts) {
  if (shifts.size() < 12)
    throw InsufficientData("detect_outliers: need at least 12 records");

  // one representative per level for the rolling statistics
  std::map<int, double> per_n;
  for (const auto& s : shifts) per_n.emplace(s.n, s.delta_mu_abs);
  std::vector<int> ns;
  std::vector<double> logd;
  for (const auto& [n, d] : per_n) {
    ns.push_back(n);
    logd.push_back(std::log(std::max(d, 1e-300)));
  }

  const auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
  };

  const int half = 3;  // window 7
  std::vector<bool> flagged(ns.size(), false);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(i + half, ns.size() - 1);
    std::vector<double> window(logd.begin() + lo, logd.begin() + hi + 1);
    const double med = median_of(window);
    std::vector<double> dev;
    dev.reserve(window.size());
    for (double v : window) dev.push_back(std::abs(v - med));
    const double mad = std::max(median_of(dev), 1e-12);
    flagged[i] = std::abs(logd[i] - med) > 3.0 * mad;
  }

  for (auto& s : shifts) {
    const auto it = std::lower_bound(ns.begin(), ns.end(), s.n);
    if (it != ns.end() && *it == s.n)
      s.outlier = flagged[static_cast<std::size_t>(it - ns.begin())];
  }
  return shifts;
}

SlopeOscillationReport slope_oscillation_report(
    const std::vector<std::vector<ShiftRecord>>& shifts_per_g,
    const std::vector<double>& g_values, double at_gamma, double b,
    std::pair<int, int> n_range) {
  if (shifts_per_g.size() != g_values.size() || shifts_per_g.empty())
    throw InsufficientData("slope_oscillation_report: need one shift set per g value");

  SlopeOscillationReport rep;
  rep.at_gamma = at_gamma;
  rep.b = b;
  for (std::size_t k = 0; k < g_values.size(); ++k) {
    const FitResult fit = fit_shrink_rate(shifts_per_g[k], FitModel::power_law, n_range);
    const XY pts = loglog_points(shifts_per_g[k], n_range, nullptr);
    double ss = 0.0;
    for (std::size_t i = 0; i < pts.x.size(); ++i) {
      const double resid = pts.y[i] - (std::log(fit.amplitude) + fit.slope * pts.x[i]);
      ss += resid * resid;
    }
    const double rms = std::sqrt(ss / static_cast<double>(pts.x.size()));
    rep.entries.push_back({g_values[k], fit.slope, fit.amplitude, fit.r_squared, rms});
  }
  double lo = rep.entries.front().slope, hi = lo;
  for (const auto& e : rep.entries) {
    lo = std::min(lo, e.slope);
    hi = std::max(hi, e.slope);
  }
  rep.slope_spread = hi - lo;
  return rep;
}

}  // namespace ptspec

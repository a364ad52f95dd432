#pragma once

// Error budget of the infrared-bound argument turned into checkable numbers: allowed
// magnetization bands, the sublevel-set radius D_J, epsilon_1/epsilon_2 and a pass/fail
// certificate for a first-order jump at dimension d.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "lattice_integrals.hpp"
#include "mf_solver.hpp"
#include "models.hpp"
#include "parallel.hpp"

namespace mft {

struct Interval {
  double lo = 0.0, hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double m, double tol = 0.0) const { return m >= lo - tol && m <= hi + tol; }
};

struct ErrorBudget {
  ModelSpec model;
  int d = 0;          // 0 when the integral was supplied directly
  double id_value = 0.0;
  double delta_d = 0.0;  // slack at coupling J is J * delta_d

  /// n I_d / J, the bound on the variance of the magnetization.
  double variance_bound(double J) const { return J > 0 ? model.n * id_value / J : kInf; }
};

/// delta_d = n kappa / 2 * I_d.
inline double delta_factor(const ModelSpec& M) { return 0.5 * M.n * M.kappa; }

inline ErrorBudget error_budget_from_id(const ModelSpec& M, double id_value, int d = 0) {
  if (!(id_value >= 0)) throw Error(ErrorCode::InvalidArgument, "I_d must be non-negative");
  return {M, d, id_value, delta_factor(M) * id_value};
}

inline ErrorBudget error_budget(const ModelSpec& M, int d, double tol = 1e-10) {
  auto est = compute_id(d, IdMethod::BesselProduct, tol);
  return error_budget_from_id(M, est.value, d);
}

// ---------------------------------------------------------------- profiles

struct ProfileGrid {
  double J = 0.0;
  std::vector<double> m, phi, phi_full;
};

/// phi on n+1 equally spaced points covering the closed magnetization interval
/// (+inf at end points where the entropy diverges).
inline ProfileGrid profile(const ModelSpec& M, double J, int n, std::optional<std::pair<double, double>> range = {}) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "grid must be >= 1");
  auto [lo, hi] = range ? *range : M.interval();
  ProfileGrid pg;
  pg.J = J;
  pg.m.resize(n + 1);
  for (int i = 0; i <= n; ++i) pg.m[i] = lo + (hi - lo) * i / n;
  pg.phi.resize(n + 1);
  pg.phi_full.resize(n + 1);
  parallel_for(n + 1, [&](std::size_t i) {
    pg.phi[i] = scalar_phi(M, J, pg.m[i]);
    pg.phi_full[i] = full_phi(M, J, pg.m[i]);
  });
  return pg;
}

// ---------------------------------------------------------------- allowed bands

namespace detail {

// Full-scale free energy on the half axis, +inf where the entropy diverges.
inline double full_phi_safe(const ModelSpec& M, double J, double m) {
  double v = full_phi(M, J, m);
  return std::isnan(v) ? kInf : v;
}

}  // namespace detail

/// Maximal intervals of {m >= 0 : Phi_J(m) <= min Phi_J + slack} (full scale, m >= 0 half axis).
/// Stationary points are inserted into the grid so slack = 0 returns the minimizers exactly;
/// interval ends are bisected to 1e-12.
inline std::vector<Interval> allowed_bands(const ModelSpec& M, double J, double slack, int grid = 2000) {
  if (!(slack >= 0)) throw Error(ErrorCode::InvalidArgument, "slack must be >= 0");
  if (grid < 2) throw Error(ErrorCode::InvalidArgument, "grid must be >= 2");
  auto hi = M.interval().second;
  auto roots = half_axis_roots(solve_branches(M, J, std::max(grid, 1000)));
  std::vector<double> nodes;
  for (int i = 0; i <= grid; ++i) nodes.push_back(hi * i / grid);
  for (auto& r : roots) nodes.push_back(std::max(r.m, 0.0));
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  std::vector<double> val = parallel_map<double>(nodes.size(), [&](std::size_t i) {
    return detail::full_phi_safe(M, J, nodes[i]);
  });
  double fmin = kInf;
  for (auto& r : roots)
    if (r.stability == Stability::StableMin) fmin = std::min(fmin, r.phi_full);
  for (double v : val) fmin = std::min(fmin, v);
  const double level = fmin + slack;
  // a root evaluated two ways differs by rounding; count those as inside
  const double fuzz = 1e-12 * (1.0 + std::fabs(fmin));
  auto inside = [&](double v) { return v <= level + fuzz; };

  auto refine = [&](double in, double out) {
    for (int it = 0; it < 100 && std::fabs(out - in) > 1e-12; ++it) {
      double mid = 0.5 * (in + out);
      if (inside(detail::full_phi_safe(M, J, mid))) in = mid;
      else out = mid;
    }
    return in;
  };

  std::vector<Interval> bands;
  std::size_t i = 0;
  while (i < nodes.size()) {
    if (!inside(val[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < nodes.size() && inside(val[j + 1])) ++j;
    double a = i > 0 ? refine(nodes[i], nodes[i - 1]) : nodes[i];
    double b = j + 1 < nodes.size() ? refine(nodes[j], nodes[j + 1]) : nodes[j];
    bands.push_back({a, b});
    i = j + 1;
  }
  return bands;
}

/// Open gaps between consecutive allowed bands.
inline std::vector<Interval> forbidden_gaps(const std::vector<Interval>& bands) {
  std::vector<Interval> gaps;
  for (std::size_t i = 1; i < bands.size(); ++i) gaps.push_back({bands[i - 1].hi, bands[i].lo});
  return gaps;
}

// ---------------------------------------------------------------- D_J

/// Largest distance from a point of the sublevel set {Phi_J < min + theta} to the set of
/// local minima (m >= 0 half axis). Evaluated exactly on the band intervals: within an
/// interval the distance to a finite set peaks at an end point or midway between minima.
inline double compute_DJ(const ModelSpec& M, double J, double theta, int grid = 1000) {
  if (!(theta > 0)) throw Error(ErrorCode::InvalidArgument, "theta must be positive");
  auto bands = allowed_bands(M, J, theta, grid);
  std::vector<double> minima;
  for (auto& r : half_axis_roots(solve_branches(M, J, std::max(grid, 1000))))
    if (r.stability == Stability::StableMin) minima.push_back(std::max(r.m, 0.0));
  if (minima.empty()) return 0.0;
  auto dist = [&](double m) {
    double d = kInf;
    for (double x : minima) d = std::min(d, std::fabs(m - x));
    return d;
  };
  double best = 0.0;
  for (auto& b : bands) {
    best = std::max({best, dist(b.lo), dist(b.hi)});
    for (std::size_t k = 1; k < minima.size(); ++k) {
      double mid = 0.5 * (minima[k - 1] + minima[k]);
      if (b.contains(mid)) best = std::max(best, dist(mid));
    }
  }
  return best;
}

// ---------------------------------------------------------------- certificate

struct CertifyOptions {
  int window_points = 21;          // J grid over the window (J_MF is always added)
  int eps1_points = 60;            // J' grid over [0, J_hi] for epsilon_1
  int band_grid = 1000;
  int slope_grid = 1000;           // absolute grid over the interval for K
  std::optional<double> delta_override;  // inject a delta_d (e.g. 0 for d = infinity)
};

struct WindowSample {
  double J = 0.0;
  double barrier = 0.0;
  double slack = 0.0;
  double margin = 0.0;
  std::vector<Interval> bands;      // allowed magnetizations
  std::vector<Interval> forbidden;  // open gaps between allowed bands
};

struct Certificate {
  ModelSpec model;
  int d = 0;
  double id_value = 0.0;
  double delta_d = 0.0;
  double J_lo = 0.0, J_hi = 0.0;
  double J_MF = 0.0;
  double min_margin = 0.0;
  std::vector<WindowSample> samples;
  double epsilon1 = 0.0;
  double epsilon2 = 0.0;
  double varkappa = 0.0;  // min over the window of |w| m+ (full-space norm)
  double K = 0.0;         // max |dPhi/dm| over epsilon_1 balls around the minima
  bool passed = false;
  std::string constants_note =
      "varkappa = min over window of |w| m+, K = max |dPhi/dm| on epsilon_1-balls about the minima; "
      "one admissible instantiation of existential constants";
};

namespace detail {

// dPhi_full/dm along the axis: |w|^2 (h(m) - J m) with h the Legendre dual of m.
inline double full_phi_slope(const ModelSpec& M, double J, double m) {
  auto [lo, hi] = M.interval();
  if (!(m > lo && m < hi)) return kInf;
  double h = legendre_entropy(ModelG{M}, m, lo, hi).h;
  return M.omega_norm_sq * (h - J * m);
}

}  // namespace detail

/// Certificate at dimension d for a J window containing J_MF.
inline Certificate certify(const ModelSpec& M, int d, double J_lo, double J_hi, const CertifyOptions& opt = {}) {
  if (!(J_hi > J_lo && J_lo >= 0)) throw Error(ErrorCode::InvalidArgument, "need 0 <= J_lo < J_hi");
  Certificate c;
  c.model = M;
  c.d = d;
  c.J_lo = J_lo;
  c.J_hi = J_hi;
  if (opt.delta_override) {
    c.delta_d = *opt.delta_override;
    c.id_value = delta_factor(M) > 0 ? c.delta_d / delta_factor(M) : 0.0;
  } else {
    auto eb = error_budget(M, d);
    c.delta_d = eb.delta_d;
    c.id_value = eb.id_value;
  }

  auto tp = find_transition(M);
  c.J_MF = tp.J_MF;
  if (!(tp.J_MF >= J_lo && tp.J_MF <= J_hi))
    throw Error(ErrorCode::WindowExcludesTransition,
                "J_MF = " + std::to_string(tp.J_MF) + " is outside [" + std::to_string(J_lo) + ", " + std::to_string(J_hi) + "]");

  std::vector<double> Js;
  for (int i = 0; i < opt.window_points; ++i) Js.push_back(J_lo + (J_hi - J_lo) * i / std::max(1, opt.window_points - 1));
  Js.push_back(tp.J_MF);
  std::sort(Js.begin(), Js.end());

  c.samples.resize(Js.size());
  parallel_for(Js.size(), [&](std::size_t i) {
    WindowSample s;
    s.J = Js[i];
    s.barrier = barrier_height(M, s.J);
    s.slack = s.J * c.delta_d;
    s.margin = s.barrier - s.slack;
    s.bands = allowed_bands(M, s.J, s.slack, opt.band_grid);
    s.forbidden = forbidden_gaps(s.bands);
    c.samples[i] = s;
  });
  c.min_margin = kInf;
  for (auto& s : c.samples) c.min_margin = std::min(c.min_margin, s.margin);
  c.passed = c.min_margin > 0;

  // epsilon_1 = sup_{0 <= J' <= J_hi} D_{J'}(J_hi delta_d)
  double theta = J_hi * c.delta_d;
  std::vector<double> Jp;
  for (int i = 0; i <= opt.eps1_points; ++i) Jp.push_back(J_hi * i / opt.eps1_points);
  for (double J : Js) Jp.push_back(J);
  std::vector<double> D(Jp.size(), 0.0);
  if (theta > 0) parallel_for(Jp.size(), [&](std::size_t i) { D[i] = compute_DJ(M, Jp[i], theta, opt.band_grid); });
  c.epsilon1 = *std::max_element(D.begin(), D.end());

  // varkappa from the asymmetric branch over the window
  double mmin = kInf;
  for (double J : Js) {
    auto top = solve_branches(M, J, 1000).max_stable_positive();
    mmin = std::min(mmin, top ? top->m : 0.0);
  }
  c.varkappa = std::sqrt(M.omega_norm_sq) * mmin;

  // K: slope of Phi on epsilon_1 balls around the minima at J_MF
  // The slope diverges at the ends of the interval, so a ball reaching them gives K = inf.
  // Nodes are the ball ends plus a fixed absolute grid, so shrinking balls give nested sets.
  double K = 0.0;
  auto [ilo, ihi] = M.interval();
  const double hgrid = (ihi - ilo) / opt.slope_grid;
  auto mins = half_axis_roots(solve_branches(M, tp.J_MF, 1000));
  for (auto& r : mins) {
    if (r.stability != Stability::StableMin) continue;
    double a = std::max(r.m, 0.0) - c.epsilon1, b = std::max(r.m, 0.0) + c.epsilon1;
    if (a <= ilo || b >= ihi) {
      K = kInf;
      break;
    }
    std::vector<double> nodes{a, b};
    for (double m = std::ceil(a / hgrid) * hgrid; m < b; m += hgrid) nodes.push_back(m);
    std::vector<double> sl(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) { sl[i] = std::fabs(detail::full_phi_slope(M, tp.J_MF, nodes[i])); });
    for (double v : sl) K = std::max(K, v);
  }
  c.K = K;

  double denom = 0.5 * c.varkappa * c.varkappa - c.delta_d;
  c.epsilon2 = denom > 0 ? (2.0 * c.epsilon1 * c.K + tp.J_MF * c.delta_d) / denom : kInf;
  return c;
}

/// Bound J delta_d on |e - m^2/2| at coupling J.
inline double energy_magnetization_gap(const ModelSpec& M, double J, int d) { return J * error_budget(M, d).delta_d; }

}  // namespace mft

#pragma once

// Solutions of the scalar mean-field equation m = g'(J m): root scans, the maximal
// stable branch J -> m_MF(J), the transition coupling and barrier heights.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "error.hpp"
#include "models.hpp"
#include "parallel.hpp"

namespace mft {

enum class Stability { StableMin, Unstable };

inline const char* to_string(Stability s) { return s == Stability::StableMin ? "stable" : "unstable"; }

struct BranchPoint {
  double J = 0.0;
  double m = 0.0;
  Stability stability = Stability::Unstable;
  double phi = 0.0;        // scalar_phi at the root
  double phi_full = 0.0;   // same point on the full scale
  double curvature = 0.0;  // J g''(J m); stable iff < 1
  bool marginal = false;   // curvature within the tie band around 1
};

struct BranchSet {
  double J = 0.0;
  std::vector<BranchPoint> roots;  // sorted by m
  bool scan_too_coarse = false;    // two roots within two scan cells

  std::vector<BranchPoint> stable() const {
    std::vector<BranchPoint> out;
    for (auto& r : roots)
      if (r.stability == Stability::StableMin) out.push_back(r);
    return out;
  }
  /// Largest stable root with m > 0, if any.
  std::optional<BranchPoint> max_stable_positive(double min_m = 1e-9) const {
    std::optional<BranchPoint> best;
    for (auto& r : roots)
      if (r.stability == Stability::StableMin && r.m > min_m && (!best || r.m > best->m)) best = r;
    return best;
  }
  /// Stable root with the lowest free energy (ties go to the smaller |m|).
  std::optional<BranchPoint> global_min() const {
    std::optional<BranchPoint> best;
    for (auto& r : roots) {
      if (r.stability != Stability::StableMin) continue;
      if (!best || r.phi_full < best->phi_full - 1e-14 ||
          (std::fabs(r.phi_full - best->phi_full) <= 1e-14 && std::fabs(r.m) < std::fabs(best->m)))
        best = r;
    }
    return best;
  }
};

struct SolverOptions {
  double root_tol = 1e-13;    // bisection width in m
  double merge_tol = 1e-8;    // roots closer than this are merged
  double tie_band = 1e-7;     // |J g'' - 1| below this is flagged marginal
};

inline BranchPoint make_branch_point(const ModelSpec& M, double J, double m, const SolverOptions& opt = {}) {
  BranchPoint p;
  p.J = J;
  p.m = m;
  p.curvature = J * g_second(M, J * m);
  p.stability = p.curvature < 1.0 ? Stability::StableMin : Stability::Unstable;
  p.marginal = std::fabs(p.curvature - 1.0) < opt.tie_band;
  double axis = axis_phi_stationary(M, J, m);
  p.phi_full = axis_to_full(M, J, axis);
  p.phi = M.kind == ModelKind::Potts ? potts_phi(M.param, J, m) : axis;
  return p;
}

/// All sign changes of m - g'(J m) on a uniform scan of the open magnetization interval
/// (with m = 0 inserted as a node), refined to opt.root_tol.
inline BranchSet solve_branches(const ModelSpec& M, double J, int scan_resolution = 2000,
                                const SolverOptions& opt = {}) {
  if (!(J >= 0)) throw Error(ErrorCode::InvalidArgument, "J must be non-negative");
  if (scan_resolution < 4) throw Error(ErrorCode::InvalidArgument, "scan resolution too small");
  auto [lo, hi] = M.interval();
  double width = hi - lo, inset = 1e-12 * width;
  std::vector<double> nodes;
  nodes.reserve(scan_resolution + 2);
  for (int i = 0; i <= scan_resolution; ++i) nodes.push_back(lo + inset + (width - 2 * inset) * i / scan_resolution);
  nodes.push_back(0.0);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  auto f = [&](double m) { return m - g_prime(M, J * m); };
  std::vector<double> fv = parallel_map<double>(nodes.size(), [&](std::size_t i) { return f(nodes[i]); });

  std::vector<double> found;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (fv[i] == 0.0) {
      found.push_back(nodes[i]);
      continue;
    }
    if (i + 1 < nodes.size() && fv[i + 1] != 0.0 && (fv[i] < 0) != (fv[i + 1] < 0)) {
      boost::uintmax_t it = 200;
      auto tol = [&](double a, double b) { return std::fabs(b - a) <= opt.root_tol; };
      auto [a, b] = boost::math::tools::toms748_solve(f, nodes[i], nodes[i + 1], fv[i], fv[i + 1], tol, it);
      found.push_back(0.5 * (a + b));
    }
  }

  BranchSet out;
  out.J = J;
  std::sort(found.begin(), found.end());
  double cell = width / scan_resolution;
  std::vector<double> merged;
  for (double m : found) {
    if (!merged.empty() && std::fabs(m - merged.back()) < opt.merge_tol) continue;
    if (!merged.empty() && std::fabs(m - merged.back()) < 2 * cell) out.scan_too_coarse = true;
    merged.push_back(m);
  }
  for (double m : merged) out.roots.push_back(make_branch_point(M, J, m, opt));
  return out;
}

// ---------------------------------------------------------------- branch tracing

struct TracePoint {
  double J = 0.0;
  double m_max_stable = 0.0;  // largest stable root (m_MF of the maximal branch)
  double m_global = 0.0;      // magnitude of the global minimizer
  double phi = 0.0;           // scalar phi at m_max_stable
  double phi_axis = 0.0;      // on-axis phi at m_max_stable (energy identity scale)
  bool zero_stable = true;
  bool continuation_agreed = true;  // seeded Newton landed on the scanned root
};

struct BranchTrace {
  std::vector<TracePoint> points;
  std::optional<double> J1;  // first grid J with a positive stable root
  std::optional<double> J2;  // last grid J at which m = 0 is stable
  std::vector<double> max_stable_jumps;  // J where the maximal stable branch jumps
  std::vector<double> global_jumps;      // J where the global minimizer jumps
  int restarts = 0;
  std::vector<BranchSet> sets;           // full root sets per grid J
};

namespace detail {

// Newton on m - g'(J m) from a seed; nullopt when it leaves the interval or stalls.
inline std::optional<double> newton_root(const ModelSpec& M, double J, double seed) {
  auto [lo, hi] = M.interval();
  double m = seed;
  for (int it = 0; it < 60; ++it) {
    double h = J * m;
    double f = m - g_prime(M, h), df = 1.0 - J * g_second(M, h);
    if (df == 0) return std::nullopt;
    double next = m - f / df;
    if (!(next > lo && next < hi)) return std::nullopt;
    if (std::fabs(next - m) < 1e-14) return next;
    m = next;
  }
  return std::nullopt;
}

}  // namespace detail

/// Traces the maximal stable branch over steps+1 equally spaced couplings in [J_lo, J_hi].
/// Every J is scanned (this is what finds J1, J2 and the global minimizer); a Newton solve
/// seeded from the previous J runs alongside and a disagreement counts as a restart.
inline BranchTrace trace_max_branch(const ModelSpec& M, double J_lo, double J_hi, int steps,
                                    int scan_resolution = 1000) {
  if (!(J_lo >= 0 && J_hi >= J_lo && std::isfinite(J_hi)))
    throw Error(ErrorCode::InvalidArgument, "J range must satisfy 0 <= J_lo <= J_hi < inf");
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
  BranchTrace tr;
  tr.sets.resize(steps + 1);
  parallel_for(steps + 1, [&](std::size_t i) {
    double J = J_lo + (J_hi - J_lo) * double(i) / steps;
    tr.sets[i] = solve_branches(M, J, scan_resolution);
  });

  double prev_m = 0.0, prev_dm = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const BranchSet& bs = tr.sets[i];
    TracePoint p;
    p.J = bs.J;
    auto top = bs.max_stable_positive();
    p.m_max_stable = top ? top->m : 0.0;
    auto gm = bs.global_min();
    p.m_global = gm ? std::fabs(gm->m) : 0.0;
    for (auto& r : bs.roots)
      if (std::fabs(r.m) < 1e-12) p.zero_stable = r.stability == Stability::StableMin;
    p.phi = top ? top->phi : make_branch_point(M, p.J, 0.0).phi;
    p.phi_axis = axis_phi_stationary(M, p.J, p.m_max_stable);

    if (i > 0 && prev_m > 0 && p.m_max_stable > 0) {
      auto seeded = detail::newton_root(M, p.J, prev_m);
      double dm = seeded ? std::fabs(*seeded - prev_m) : kInf;
      bool escaped = !seeded || dm > 10.0 * std::max(prev_dm, 1e-3);
      p.continuation_agreed = !escaped && std::fabs(*seeded - p.m_max_stable) < 1e-8;
      if (!p.continuation_agreed) ++tr.restarts;
    }
    prev_dm = std::fabs(p.m_max_stable - prev_m);
    prev_m = p.m_max_stable;

    if (!tr.J1 && p.m_max_stable > 0) tr.J1 = p.J;
    if (p.zero_stable) tr.J2 = p.J;
    tr.points.push_back(p);
  }

  // A candidate is a step far larger than the typical one. Steep continuous onsets look the
  // same on a grid, so each candidate is bisected down to a 1e-9 relative J interval and kept
  // only if the step survives.
  auto jumps = [&](auto get) {
    std::vector<double> out, d;
    for (std::size_t i = 1; i < tr.points.size(); ++i) d.push_back(std::fabs(get(tr.points[i]) - get(tr.points[i - 1])));
    if (d.empty()) return out;
    std::vector<double> sorted = d;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    double med = sorted[sorted.size() / 2];
    auto at = [&](double J) {
      BranchSet bs = solve_branches(M, J, scan_resolution);
      TracePoint p;
      auto top = bs.max_stable_positive();
      p.m_max_stable = top ? top->m : 0.0;
      auto gm = bs.global_min();
      p.m_global = gm ? std::fabs(gm->m) : 0.0;
      return get(p);
    };
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!(d[i] > 0.05 && d[i] > 10.0 * med)) continue;
      double a = tr.points[i].J, b = tr.points[i + 1].J;
      double va = get(tr.points[i]), vb = get(tr.points[i + 1]);
      while (b - a > 1e-9 * std::max(1.0, b)) {
        double mid = 0.5 * (a + b), vm = at(mid);
        if (std::fabs(vm - va) >= std::fabs(vb - vm)) {
          b = mid;
          vb = vm;
        } else {
          a = mid;
          va = vm;
        }
      }
      if (std::fabs(vb - va) > 0.5 * d[i]) out.push_back(tr.points[i + 1].J);
    }
    return out;
  };
  tr.max_stable_jumps = jumps([](const TracePoint& p) { return p.m_max_stable; });
  tr.global_jumps = jumps([](const TracePoint& p) { return p.m_global; });
  return tr;
}

// ---------------------------------------------------------------- transition

struct TransitionPoint {
  double J_MF = 0.0;
  double m_c = 0.0;
  double degeneracy_residual = 0.0;  // phi(m_c) - phi(0) at J_MF, on the full scale
  double J_lo = 0.0, J_hi = 0.0;     // bracket that was used
  std::optional<double> J1, J2;      // spinodals (auto-bracket only)
};

namespace detail {

inline int transition_scan(const ModelSpec& M) { return M.kind == ModelKind::Nematic ? 600 : 2000; }

// Largest stable positive root at J, refined by Newton from the scan.
inline std::optional<double> m_plus(const ModelSpec& M, double J, int scan) {
  auto bs = solve_branches(M, J, scan);
  auto top = bs.max_stable_positive();
  if (!top) return std::nullopt;
  return top->m;
}

inline double delta_phi(const ModelSpec& M, double J, double m) {
  return axis_phi_stationary(M, J, m) - axis_phi_stationary(M, J, 0.0);
}

}  // namespace detail

/// Coupling at which the symmetric and the maximal asymmetric stable solutions are
/// degenerate. Without a bracket, [J1, J2] is found first: J2 = 1/g''(0) is where m = 0
/// loses stability and J1 (the appearance of the asymmetric branch) is bisected.
inline TransitionPoint find_transition(const ModelSpec& M, std::optional<std::pair<double, double>> bracket = {},
                                       double J_tol = 1e-12) {
  const int scan = detail::transition_scan(M);
  TransitionPoint tp;
  double J_lo, J_hi;
  if (bracket) {
    J_lo = bracket->first;
    J_hi = bracket->second;
    if (!(J_lo >= 0 && J_hi > J_lo)) throw Error(ErrorCode::BracketInvalid, "need 0 <= J_lo < J_hi");
  } else {
    double J2 = 1.0 / g_second(M, 0.0);
    tp.J2 = J2;
    // the maximal branch must exist at (or just below) J2 for a first-order transition
    double top = J2 * (1.0 - 1e-9);
    if (!detail::m_plus(M, top, scan))
      throw Error(ErrorCode::NoAsymmetricBranch, "no asymmetric stable branch below J2 = " + std::to_string(J2) +
                                                      " (the transition is not first order)");
    double a = 0.0, b = top;
    while (b - a > 1e-10 * b) {
      double mid = 0.5 * (a + b);
      if (detail::m_plus(M, mid, scan)) b = mid;
      else a = mid;
    }
    tp.J1 = b;
    J_lo = b;
    J_hi = top;
  }
  tp.J_lo = J_lo;
  tp.J_hi = J_hi;

  auto mlo = detail::m_plus(M, J_lo, scan);
  if (!mlo) throw Error(ErrorCode::NoAsymmetricBranch, "no asymmetric stable branch at J_lo");
  auto mhi = detail::m_plus(M, J_hi, scan);
  if (!mhi) throw Error(ErrorCode::BracketInvalid, "no asymmetric stable branch at J_hi");
  double dlo = detail::delta_phi(M, J_lo, *mlo), dhi = detail::delta_phi(M, J_hi, *mhi);
  if (!(dlo > 0 && dhi < 0))
    throw Error(ErrorCode::BracketInvalid, "phi(m+) - phi(0) does not change sign over the bracket");

  // Delta phi is strictly decreasing on the bracket (its J-derivative is -m+^2/2), so the
  // root is unique. m+ moves continuously on the bracket, so Newton from the previous m+
  // replaces the scan.
  // seeded from the top of the bracket, where m+ is far from the unstable middle root
  double seed = *mhi;
  auto stable_newton = [&](double J) -> std::optional<double> {
    auto m = detail::newton_root(M, J, seed);
    if (!m || *m <= 1e-9 || J * g_second(M, J * *m) >= 1.0) return detail::m_plus(M, J, scan);
    return m;
  };
  auto dphi = [&](double J) {
    auto m = stable_newton(J);
    if (!m) return 1.0;  // treated as "above": the branch has not appeared yet
    return detail::delta_phi(M, J, *m);
  };
  double a = J_lo, b = J_hi;
  boost::uintmax_t it = 300;
  auto tol = [&](double x, double y) { return std::fabs(y - x) <= J_tol * std::max(1.0, std::fabs(x)); };
  auto [ra, rb] = boost::math::tools::toms748_solve(dphi, a, b, dlo, dhi, tol, it);
  tp.J_MF = 0.5 * (ra + rb);
  auto mc = stable_newton(tp.J_MF);
  if (!mc) throw Error(ErrorCode::NoAsymmetricBranch, "lost the asymmetric branch at J_MF");
  tp.m_c = *mc;
  tp.degeneracy_residual = axis_to_full(M, tp.J_MF, axis_phi_stationary(M, tp.J_MF, tp.m_c)) -
                           axis_to_full(M, tp.J_MF, axis_phi_stationary(M, tp.J_MF, 0.0));
  return tp;
}

// ---------------------------------------------------------------- barrier

/// Stationary points on the half-axis m >= 0 (the physical orientation of the order parameter).
inline std::vector<BranchPoint> half_axis_roots(const BranchSet& bs) {
  std::vector<BranchPoint> out;
  for (auto& r : bs.roots)
    if (r.m >= -1e-12) out.push_back(r);
  return out;
}

/// Delta(J): free energy of the separating unstable root minus the higher of the two
/// adjacent minima, on the full scale. Zero when fewer than two minima exist on m >= 0.
/// With more than two minima the largest adjacent-pair barrier is returned.
inline double barrier_height(const ModelSpec& M, double J, int scan_resolution = 2000) {
  auto roots = half_axis_roots(solve_branches(M, J, scan_resolution));
  double best = 0.0;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (roots[i].stability != Stability::StableMin) continue;
    std::size_t j = i + 1;
    while (j < roots.size() && roots[j].stability != Stability::StableMin) ++j;
    if (j >= roots.size()) break;
    double top = -kInf;
    for (std::size_t k = i + 1; k < j; ++k) top = std::max(top, roots[k].phi_full);
    if (top == -kInf) continue;
    best = std::max(best, top - std::max(roots[i].phi_full, roots[j].phi_full));
  }
  return best;
}

}  // namespace mft

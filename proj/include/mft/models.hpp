#pragma once

// Single-spin data of the Potts, cubic and O(N)-nematic models and their on-axis
// thermodynamic functions.
//
// Conventions. For a model with a priori measure mu on spins S and symmetry axis w,
//   g(h) = |w|^{-2} log E_mu exp(h (S, w)),   s(m) = inf_h [g(h) - m h],
//   phi_J(m) = -J m^2 / 2 - s(m),
// so that m = g'(J m) at stationary points and phi_J(m) = J m^2 / 2 - g(J m) there.
// The full free energy along the axis is |w|^2 phi_J(m) up to a model constant.
//
//   Potts   : w = e_1 - (1/(q-1)) sum_{k>1} e_k (tetrahedral frame), |w|^2 = q/(q-1);
//             the scalar m is x_1 - 1/q for x = (1/q + m, 1/q - m/(q-1), ...).
//   cubic   : w = e_1, g(h) = -log(2r) + log(r - 1 + cosh h) (the -log 2 offset is kept).
//   nematic : w = diag(1, -1/(N-1), ...), lambda = <v_1^2> - 1/N.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/roots.hpp>

#include "error.hpp"
#include "special.hpp"

namespace mft {

enum class ModelKind { Potts, Cubic, Nematic };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Potts: return "potts";
    case ModelKind::Cubic: return "cubic";
    case ModelKind::Nematic: return "nematic";
  }
  return "?";
}

struct ModelSpec {
  ModelKind kind = ModelKind::Potts;
  int param = 3;               // q, r or N
  int n = 2;                   // dimension of the spin space
  double kappa = 0.0;          // max |S|^2
  double omega_norm_sq = 1.0;  // |w|^2

  static ModelSpec potts(int q) {
    if (q < 2) throw Error(ErrorCode::InvalidArgument, "Potts needs q >= 2");
    return {ModelKind::Potts, q, q - 1, (q - 1.0) / q, q / (q - 1.0)};
  }
  static ModelSpec cubic(int r) {
    if (r < 1) throw Error(ErrorCode::InvalidArgument, "cubic needs r >= 1");
    return {ModelKind::Cubic, r, r, 1.0, 1.0};
  }
  static ModelSpec nematic(int N) {
    if (N < 3) throw Error(ErrorCode::InvalidArgument, "nematic needs N >= 3");
    return {ModelKind::Nematic, N, N * (N - 1) / 2, (N - 1.0) / N, N / (N - 1.0)};
  }
  static ModelSpec from_name(const std::string& name, int param) {
    if (name == "potts") return potts(param);
    if (name == "cubic") return cubic(param);
    if (name == "nematic") return nematic(param);
    throw Error(ErrorCode::InvalidArgument, "unknown model '" + name + "'");
  }

  std::string name() const { return to_string(kind); }

  /// Closure of the range of g'. Interior points are reachable magnetizations.
  std::pair<double, double> interval() const {
    switch (kind) {
      case ModelKind::Potts: return {-1.0 / param, (param - 1.0) / param};
      case ModelKind::Cubic: return {-1.0, 1.0};
      case ModelKind::Nematic: return {-1.0 / param, (param - 1.0) / param};
    }
    return {0, 0};
  }
};

// ---------------------------------------------------------------- Potts

/// Raw Potts mean-field free energy sum_k (-J/2 x_k^2 + x_k log x_k) on the on-axis family.
inline double potts_phi(int q, double J, double m) {
  double x1 = 1.0 / q + m, xk = 1.0 / q - m / (q - 1.0);
  const double slack = 1e-14;
  if (x1 < -slack || xk < -slack || x1 > 1.0 + slack)
    throw Error(ErrorCode::OutOfSimplex, "m = " + std::to_string(m) + " leaves the simplex");
  x1 = std::clamp(x1, 0.0, 1.0);
  xk = std::clamp(xk, 0.0, 1.0);
  return -0.5 * J * (x1 * x1 + (q - 1) * xk * xk) + xlogx(x1) + (q - 1) * xlogx(xk);
}

/// Same functional at an arbitrary simplex point.
template <class Vec>
double potts_phi_simplex(double J, const Vec& x) {
  double v = 0.0;
  for (double xk : x) {
    if (xk < -1e-14) throw Error(ErrorCode::OutOfSimplex, "negative simplex coordinate");
    xk = std::max(xk, 0.0);
    v += -0.5 * J * xk * xk + xlogx(xk);
  }
  return v;
}

inline double potts_g(int q, double h) {
  double kap = (q - 1.0) / q, u = h * q / (q - 1.0), lq1 = std::log(q - 1.0);
  // log(e^h + (q-1) e^{-h/(q-1)}) = -h/(q-1) + log(e^u + q - 1)
  return kap * (-h / (q - 1.0) + lq1 + log1pexp(u - lq1) - std::log(double(q)));
}

/// Right-hand side of the Potts fixed-point equation, m -> potts_g_prime(q, J m).
inline double potts_g_prime(int q, double h) {
  double kap = (q - 1.0) / q, u = h * q / (q - 1.0);
  if (u > 0) {
    double e = std::exp(-u);
    return kap * (1.0 - e) / (1.0 + (q - 1.0) * e);
  }
  double e = std::exp(u);
  return kap * (e - 1.0) / (e + q - 1.0);
}

inline double potts_g_second(int q, double h) {
  double u = h * q / (q - 1.0);
  if (u > 0) {
    double e = std::exp(-u), den = 1.0 + (q - 1.0) * e;
    return q * e / (den * den);
  }
  double e = std::exp(u), den = e + q - 1.0;
  return q * e / (den * den);
}

// ---------------------------------------------------------------- cubic

inline double cubic_g(int r, double h) {
  double a = std::fabs(h), e = std::exp(-a);
  // log(r - 1 + cosh h) = |h| + log((r-1) e^{-|h|} + (1 + e^{-2|h|}) / 2)
  return -std::log(2.0 * r) + a + std::log((r - 1.0) * e + 0.5 * (1.0 + e * e));
}

inline double cubic_g_prime(int r, double h) {
  double a = std::fabs(h), e = std::exp(-a);
  double v = 0.5 * (1.0 - e * e) / ((r - 1.0) * e + 0.5 * (1.0 + e * e));
  return h < 0 ? -v : v;
}

inline double cubic_g_second(int r, double h) {
  double a = std::fabs(h), e = std::exp(-a);
  double den = (r - 1.0) * e + 0.5 * (1.0 + e * e);
  double num = ((r - 1.0) * 0.5 * (1.0 + e * e) + e) * e;
  return num / (den * den);
}

// ---------------------------------------------------------------- Ising block

/// Ising mean-field free energy with bias mu; its nonzero minimizers solve mu = tanh(J mu / 2).
inline double ising_theta(double J, double mu) {
  if (std::fabs(mu) > 1.0 + 1e-14) throw Error(ErrorCode::OutOfDomain, "|mu| > 1");
  mu = std::clamp(mu, -1.0, 1.0);
  return -0.25 * J * mu * mu + xlogx(0.5 * (1.0 + mu)) + xlogx(0.5 * (1.0 - mu));
}

/// Largest non-negative solution of rho = tanh(J rho / 2).
inline double ising_rho(double J) {
  if (J <= 2.0) return 0.0;
  auto f = [J](double r) { return r - std::tanh(0.5 * J * r); };
  double lo = 1e-300, hi = 1.0;
  // f < 0 just above 0 because J/2 > 1, f(1) > 0
  if (f(lo) >= 0) lo = 1e-12;
  boost::uintmax_t it = 200;
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), it);
  return 0.5 * (a + b);
}

// ---------------------------------------------------------------- nematic

struct NematicMoments {
  double log_ratio = 0.0;  // log of E[e^{a x^2}] under the normalized w-weight
  double mean_x2 = 0.0;    // tilted mean of x^2
  double var_x2 = 0.0;     // tilted variance of x^2 (only when requested)
};

namespace detail {

inline double nematic_log_norm(int N) {
  // int_0^1 (1-x^2)^e dx = B(1/2, e+1) / 2
  double e = 0.5 * (N - 3);
  return std::lgamma(0.5) + std::lgamma(e + 1.0) - std::lgamma(e + 1.5) - std::log(2.0);
}

}  // namespace detail

/// Moments of x^2 under (1-x^2)^{(N-3)/2} e^{a x^2} dx on [0, 1], a = h N/(N-1).
inline NematicMoments nematic_moments(int N, double h, bool want_var = true, double tol = 1e-12) {
  if (N < 3) throw Error(ErrorCode::InvalidArgument, "nematic needs N >= 3");
  const double a = h * N / (N - 1.0), e = 0.5 * (N - 3);
  auto L = [&](double x) {
    double v = a * x * x;
    if (e > 0) v += e * std::log1p(-x * x);
    return v;
  };

  // mode of the weight; integrate only where it is within e^{-745} of the peak
  double xp;
  if (e == 0) xp = a > 0 ? 1.0 : 0.0;
  else xp = a > e ? std::sqrt(1.0 - e / a) : 0.0;
  double Lm = xp < 1.0 ? L(xp) : a;
  const double drop = 745.0;
  auto edge = [&](double inside, double outside) {
    if (Lm - L(outside) < drop) return outside;
    for (int i = 0; i < 200 && std::fabs(outside - inside) > 1e-15; ++i) {
      double mid = 0.5 * (inside + outside);
      if (Lm - L(mid) < drop) inside = mid;
      else outside = mid;
    }
    return outside;
  };
  double lo = xp > 0 ? edge(xp, 0.0) : 0.0;
  double hi = xp < 1 ? edge(xp, 1.0) : 1.0;

  boost::math::quadrature::tanh_sinh<double> ts(12);
  auto integrate = [&](auto&& f) {
    double total = 0.0;
    auto piece = [&](double u, double v) {
      if (v - u <= 1e-13 * (1.0 + std::fabs(u))) return;  // negligible mass, and tanh-sinh dislikes it
      double err = 0.0, l1 = 0.0;
      // shifted to start at 0: this Boost version mishandles left endpoints with |a| >= 1/2
      double r = ts.integrate([&](double t) { return f(u + t); }, 0.0, v - u, tol, &err, &l1);
      // far out on the axis the exponent is a difference of two large numbers, so the
      // attainable relative accuracy is ~1e-11 rather than tol; only gross failures throw
      if (!std::isfinite(r) || err > std::max({1e-7, 1e3 * tol, 1e-12 * std::fabs(Lm)}) * std::max(l1, 1e-300))
        throw Error(ErrorCode::QuadratureFailure, "nematic weight integral did not converge");
      total += r;
    };
    if (xp > lo && xp < hi) {
      piece(lo, xp);
      piece(xp, hi);
    } else {
      piece(lo, hi);
    }
    return total;
  };

  auto w = [&](double x) { return x >= 1.0 ? (e == 0 ? std::exp(a - Lm) : 0.0) : std::exp(L(x) - Lm); };
  double Z = integrate([&](double x) { return w(x); });
  double M1 = integrate([&](double x) { return x * x * w(x); }) / Z;
  NematicMoments out;
  out.log_ratio = std::log(Z) + Lm - detail::nematic_log_norm(N);
  out.mean_x2 = M1;
  if (want_var) {
    out.var_x2 = integrate([&](double x) {
                   double d = x * x - M1;
                   return d * d * w(x);
                 }) / Z;
  }
  return out;
}

inline double nematic_g(int N, double h) {
  auto mo = nematic_moments(N, h, false);
  return (N - 1.0) / N * (mo.log_ratio - h / (N - 1.0));
}
inline double nematic_g_prime(int N, double h) { return nematic_moments(N, h, false).mean_x2 - 1.0 / N; }
inline double nematic_g_second(int N, double h) { return N / (N - 1.0) * nematic_moments(N, h, true).var_x2; }

// ---------------------------------------------------------------- generic on-axis functions

struct GValues {
  double g, dg, d2g;
};

inline double g_value(const ModelSpec& M, double h) {
  switch (M.kind) {
    case ModelKind::Potts: return potts_g(M.param, h);
    case ModelKind::Cubic: return cubic_g(M.param, h);
    case ModelKind::Nematic: return nematic_g(M.param, h);
  }
  return kNaN;
}

inline double g_prime(const ModelSpec& M, double h) {
  switch (M.kind) {
    case ModelKind::Potts: return potts_g_prime(M.param, h);
    case ModelKind::Cubic: return cubic_g_prime(M.param, h);
    case ModelKind::Nematic: return nematic_g_prime(M.param, h);
  }
  return kNaN;
}

inline double g_second(const ModelSpec& M, double h) {
  switch (M.kind) {
    case ModelKind::Potts: return potts_g_second(M.param, h);
    case ModelKind::Cubic: return cubic_g_second(M.param, h);
    case ModelKind::Nematic: return nematic_g_second(M.param, h);
  }
  return kNaN;
}

/// All three at once; for the nematic model this shares one set of quadratures.
inline GValues g_all(const ModelSpec& M, double h) {
  if (M.kind == ModelKind::Nematic) {
    int N = M.param;
    auto mo = nematic_moments(N, h, true);
    return {(N - 1.0) / N * (mo.log_ratio - h / (N - 1.0)), mo.mean_x2 - 1.0 / N, N / (N - 1.0) * mo.var_x2};
  }
  return {g_value(M, h), g_prime(M, h), g_second(M, h)};
}

/// Value of s at the ends of the interval (finite for the discrete models).
inline std::pair<double, double> boundary_entropy(const ModelSpec& M) {
  switch (M.kind) {
    case ModelKind::Potts: {
      double q = M.param, kap = M.kappa;
      // x = (0, 1/(q-1), ...) and x = (1, 0, ...)
      return {-kap * (std::log(q) - std::log(q - 1.0)), -kap * std::log(q)};
    }
    case ModelKind::Cubic: {
      double v = -std::log(2.0 * M.param) - std::log(2.0);
      return {v, v};
    }
    case ModelKind::Nematic: return {-kInf, -kInf};
  }
  return {kNaN, kNaN};
}

// ---------------------------------------------------------------- Legendre transform

struct LegendreResult {
  double s;  // inf_h g(h) - m h
  double h;  // minimizer, g'(h) = m
};

/// s(m) = inf_h [g(h) - m h] for a convex g given by an evaluator with members
///   double g(double), double dg(double), double d2g(double)
/// and the open range (range_lo, range_hi) of g'. The search starts from
/// search_interval and widens geometrically until it brackets g'(h) = m.
template <class Eval>
LegendreResult legendre_entropy(const Eval& ev, double m, double range_lo, double range_hi,
                                std::pair<double, double> search_interval = {-1.0, 1.0}) {
  if (!(m > range_lo && m < range_hi))
    throw Error(ErrorCode::BoundaryMagnetization, "m = " + std::to_string(m) + " is not inside the range of g'");
  double a = search_interval.first, b = search_interval.second;
  for (int i = 0; i < 80 && ev.dg(a) > m; ++i) a = a * 2.0 - 1.0;
  for (int i = 0; i < 80 && ev.dg(b) < m; ++i) b = b * 2.0 + 1.0;
  double fa = ev.dg(a) - m, fb = ev.dg(b) - m;
  if (fa > 0 || fb < 0)
    throw Error(ErrorCode::BoundaryMagnetization, "could not bracket g'(h) = m; m too close to the boundary");

  // safeguarded Newton on g'(h) - m, which is increasing
  double h = std::clamp(0.0, a, b);
  if (!(h > a && h < b)) h = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    double f = ev.dg(h) - m;
    if (f == 0) break;
    if (f > 0) b = h;
    else a = h;
    double d = ev.d2g(h);
    double next = (d > 0) ? h - f / d : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::fabs(next - h) <= 1e-15 * (1.0 + std::fabs(h))) {
      h = next;
      break;
    }
    h = next;
    if (b - a <= 1e-15 * (1.0 + std::fabs(h))) break;
  }
  return {ev.g(h) - m * h, h};
}

/// Evaluator adapter for a model's on-axis g.
struct ModelG {
  ModelSpec M;
  double g(double h) const { return g_value(M, h); }
  double dg(double h) const { return g_prime(M, h); }
  double d2g(double h) const { return g_second(M, h); }
};

/// On-axis entropy s(m). Potts uses the closed form; the others go through the Legendre transform.
inline double entropy(const ModelSpec& M, double m) {
  auto [lo, hi] = M.interval();
  const double edge_tol = 1e-13;
  if (m < lo - edge_tol || m > hi + edge_tol)
    throw Error(ErrorCode::OutOfDomain, "m = " + std::to_string(m) + " outside the " + M.name() + " interval");
  if (M.kind == ModelKind::Potts) {
    int q = M.param;
    double x1 = std::clamp(1.0 / q + m, 0.0, 1.0), xk = std::clamp(1.0 / q - m / (q - 1.0), 0.0, 1.0);
    return -M.kappa * (xlogx(x1) + (q - 1) * xlogx(xk) + std::log(double(q)));
  }
  auto [slo, shi] = boundary_entropy(M);
  if (m <= lo + edge_tol) return slo;
  if (m >= hi - edge_tol) return shi;
  try {
    return legendre_entropy(ModelG{M}, m, lo, hi).s;
  } catch (const Error& err) {
    if (err.code() != ErrorCode::BoundaryMagnetization) throw;
    return m < 0.5 * (lo + hi) ? slo : shi;
  }
}

/// phi_J(m) = -J m^2/2 - s(m) in the on-axis normalization (energy identity d phi/dJ = -m^2/2).
inline double axis_phi(const ModelSpec& M, double J, double m) { return -0.5 * J * m * m - entropy(M, m); }

/// The scalar free energy reported by the library: the raw simplex formula for Potts,
/// the on-axis phi otherwise.
inline double scalar_phi(const ModelSpec& M, double J, double m) {
  if (M.kind == ModelKind::Potts) return potts_phi(M.param, J, m);
  return axis_phi(M, J, m);
}

/// Free energy on the scale of the full vector functional (differences are what matter):
/// Potts raw simplex value, cubic on-axis phi, nematic |w|^2 times on-axis phi.
inline double full_phi(const ModelSpec& M, double J, double m) {
  switch (M.kind) {
    case ModelKind::Potts: return potts_phi(M.param, J, m);
    case ModelKind::Cubic: return axis_phi(M, J, m);
    case ModelKind::Nematic: return M.omega_norm_sq * axis_phi(M, J, m);
  }
  return kNaN;
}

/// Converts an on-axis phi value to the full scale used by full_phi.
inline double axis_to_full(const ModelSpec& M, double J, double phi_axis) {
  switch (M.kind) {
    case ModelKind::Potts:
      // potts_phi = |w|^2 phi_axis - J/(2q) - log q
      return M.omega_norm_sq * phi_axis - J / (2.0 * M.param) - std::log(double(M.param));
    case ModelKind::Cubic: return phi_axis;
    case ModelKind::Nematic: return M.omega_norm_sq * phi_axis;
  }
  return kNaN;
}

inline double full_to_scalar(const ModelSpec& M, double phi_full) {
  return M.kind == ModelKind::Nematic ? phi_full / M.omega_norm_sq : phi_full;
}

/// phi at a stationary point, via the dual form J m^2/2 - g(J m) (no Legendre solve).
inline double axis_phi_stationary(const ModelSpec& M, double J, double m) { return 0.5 * J * m * m - g_value(M, J * m); }

}  // namespace mft

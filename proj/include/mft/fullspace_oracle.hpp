#pragma once

// Brute-force minimization over the unreduced variational domains (simplex for Potts,
// (y, mu) for cubic, traceless diagonal fields for the nematic dual). Coarse by design:
// these exist to check the on-axis reductions, not to be precise.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "error.hpp"
#include "mf_solver.hpp"
#include "models.hpp"
#include "parallel.hpp"
#include "special.hpp"

namespace mft {

inline constexpr double kOracleBudget = 5e7;

struct SimplexPoint {
  std::vector<double> x;
};

struct PottsOracleResult {
  SimplexPoint point;
  double value = 0.0;
  double scalar_m = 0.0;  // x_max - 1/q
};

struct CubicState {
  std::vector<double> y, mu;
};

struct CubicOracleResult {
  CubicState state;
  double value = 0.0;           // K_J at the minimizer
  double value_symmetric = 0.0;  // K_J at uniform y, mu = 0
  std::vector<double> magnetization;  // y_k mu_k
  double scalar_m = 0.0;              // largest |y_k mu_k|
};

struct DiagonalField {
  std::vector<double> h;
};

struct NematicOracleResult {
  DiagonalField field;
  double value = 0.0;     // Psi_J at the minimizer
  double stderr_G = 0.0;  // sampling error of G at the minimizer (0 for quadrature)
  bool sampling_noise = false;
};

namespace detail {

inline double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Visits every composition (k_0, ..., k_{q-1}) of R in lexicographic order.
template <class F>
void for_compositions(int q, int R, std::vector<int>& k, int pos, int left, F&& f) {
  if (pos == q - 1) {
    k[pos] = left;
    f(k);
    return;
  }
  for (int v = 0; v <= left; ++v) {
    k[pos] = v;
    for_compositions(q, R, k, pos + 1, left - v, f);
  }
}

// Transfers mass between pairs of coordinates while that lowers the objective.
template <class Obj>
void polish_simplex(std::vector<double>& x, Obj&& obj, double step0) {
  double best = obj(x);
  for (double step = step0; step > 1e-12; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) {
          if (i == j || x[i] < step) continue;
          x[i] -= step;
          x[j] += step;
          double v = obj(x);
          if (v < best - 1e-15) {
            best = v;
            improved = true;
          } else {
            x[i] += step;
            x[j] -= step;
          }
        }
    }
  }
}

}  // namespace detail

/// Exhaustive grid over the simplex with spacing 1/resolution, then local polish.
/// Ties keep the lexicographically smallest grid index.
inline PottsOracleResult potts_fullspace_min(int q, double J, int resolution) {
  if (q < 2) throw Error(ErrorCode::InvalidArgument, "q >= 2");
  if (resolution < 20) throw Error(ErrorCode::InvalidArgument, "resolution must be >= 20");
  double count = detail::binom(resolution + q - 1, q - 1);
  if (q > 6 || count > kOracleBudget)
    throw Error(ErrorCode::BudgetExceeded, "simplex grid has " + std::to_string(count) + " points");

  struct Best {
    double v = kInf;
    std::vector<int> k;
  };
  // split on the first coordinate; each slot is scanned in lexicographic order
  std::vector<Best> slot(resolution + 1);
  parallel_for(resolution + 1, [&](std::size_t k0) {
    std::vector<int> k(q);
    k[0] = int(k0);
    std::vector<double> x(q);
    Best b;
    auto visit = [&](const std::vector<int>& kk) {
      for (int i = 0; i < q; ++i) x[i] = double(kk[i]) / resolution;
      double v = potts_phi_simplex(J, x);
      if (v < b.v) {
        b.v = v;
        b.k = kk;
      }
    };
    if (q == 1) visit(k);
    else detail::for_compositions(q, resolution, k, 1, resolution - int(k0), visit);
    slot[k0] = b;
  });
  Best best;
  for (auto& s : slot)
    if (s.v < best.v) best = s;

  PottsOracleResult res;
  res.point.x.resize(q);
  for (int i = 0; i < q; ++i) res.point.x[i] = double(best.k[i]) / resolution;
  detail::polish_simplex(res.point.x, [&](const std::vector<double>& x) { return potts_phi_simplex(J, x); },
                         0.5 / resolution);
  res.value = potts_phi_simplex(J, res.point.x);
  res.scalar_m = *std::max_element(res.point.x.begin(), res.point.x.end()) - 1.0 / q;
  return res;
}

/// K_J(y, mu) = sum_k y_k log y_k + y_k Theta_{2 J y_k}(mu_k).
inline double cubic_K(double J, const std::vector<double>& y, const std::vector<double>& mu) {
  double v = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) v += xlogx(y[k]) + y[k] * ising_theta(2.0 * J * y[k], mu[k]);
  return v;
}

/// Grid over y (spacing 1/resolution on the simplex) and mu (resolution+1 points on [-1, 1]).
/// K separates over k for fixed y, so the mu minimization is tabulated once per y value.
inline CubicOracleResult cubic_fullspace_min(int r, double J, int resolution) {
  if (r < 1) throw Error(ErrorCode::InvalidArgument, "r >= 1");
  if (resolution < 20) throw Error(ErrorCode::InvalidArgument, "resolution must be >= 20");
  double count = detail::binom(resolution + r - 1, r - 1);
  if (r > 4 || count > kOracleBudget)
    throw Error(ErrorCode::BudgetExceeded, "cubic grid has " + std::to_string(count) + " y-points");

  const int R = resolution, Rm = resolution;
  std::vector<double> best_term(R + 1), best_mu(R + 1);
  parallel_for(R + 1, [&](std::size_t i) {
    double y = double(i) / R, bv = kInf, bm = 0.0;
    for (int j = 0; j <= Rm; ++j) {
      double mu = -1.0 + 2.0 * j / Rm;
      double v = xlogx(y) + y * ising_theta(2.0 * J * y, mu);
      if (v < bv) {
        bv = v;
        bm = mu;
      }
    }
    best_term[i] = bv;
    best_mu[i] = bm;
  });

  struct Best {
    double v = kInf;
    std::vector<int> k;
  };
  std::vector<Best> slot(R + 1);
  parallel_for(R + 1, [&](std::size_t k0) {
    std::vector<int> k(r);
    k[0] = int(k0);
    Best b;
    auto visit = [&](const std::vector<int>& kk) {
      double v = 0.0;
      for (int i = 0; i < r; ++i) v += best_term[kk[i]];
      if (v < b.v) {
        b.v = v;
        b.k = kk;
      }
    };
    if (r == 1) {
      if (k0 == std::size_t(R)) {
        k[0] = R;
        visit(k);
      }
    } else {
      detail::for_compositions(r, R, k, 1, R - int(k0), visit);
    }
    slot[k0] = b;
  });
  Best best;
  for (auto& s : slot)
    if (s.v < best.v) best = s;

  CubicOracleResult res;
  res.state.y.resize(r);
  res.state.mu.resize(r);
  for (int i = 0; i < r; ++i) {
    res.state.y[i] = double(best.k[i]) / R;
    res.state.mu[i] = best_mu[best.k[i]];
  }
  // polish: y by pairwise transfer with mu re-optimized per component (Ising minimizer)
  auto mu_opt = [&](double y) {
    double Jy = 2.0 * J * y;
    return ising_rho(Jy);
  };
  auto obj = [&](const std::vector<double>& y) {
    double v = 0.0;
    for (double yk : y) v += xlogx(yk) + yk * ising_theta(2.0 * J * yk, mu_opt(yk));
    return v;
  };
  detail::polish_simplex(res.state.y, obj, 0.5 / R);
  for (int i = 0; i < r; ++i) {
    double rho = mu_opt(res.state.y[i]);
    // keep the sign picked on the grid
    res.state.mu[i] = res.state.mu[i] < 0 ? -rho : rho;
  }
  res.value = cubic_K(J, res.state.y, res.state.mu);
  res.value_symmetric = cubic_K(J, std::vector<double>(r, 1.0 / r), std::vector<double>(r, 0.0));
  res.magnetization.resize(r);
  for (int i = 0; i < r; ++i) {
    res.magnetization[i] = res.state.y[i] * res.state.mu[i];
    res.scalar_m = std::max(res.scalar_m, std::fabs(res.magnetization[i]));
  }
  return res;
}

// ---------------------------------------------------------------- nematic dual

enum class SphereMethod { Quadrature, Sampling };

namespace detail {

// log of (1/2pi) int_0^{2pi} exp(A cos^2 t + B sin^2 t) dt = (A+B)/2 + log I0((A-B)/2)
inline double log_circle_average(double A, double B) {
  double z = 0.5 * (A - B);
  return 0.5 * (A + B) + std::fabs(z) + std::log(i0e(z));
}

// G(h) = log E exp(sum_a h_a v_a^2) over the uniform sphere in R^N, for N = 3 or 4.
// N = 3: v_3 = z uniform on [-1, 1], the remaining circle done with I0.
// N = 4: t = v_1^2 + v_2^2 is uniform on [0, 1], both circles done with I0.
inline double sphere_G_quadrature(const std::vector<double>& h) {
  const std::size_t N = h.size();
  boost::math::quadrature::gauss_kronrod<double, 61> gk;
  auto logint = [&](auto&& logf, double a, double b) {
    // shift by a coarse maximum to keep exp() in range
    double shift = -kInf;
    for (int i = 0; i <= 64; ++i) shift = std::max(shift, logf(a + (b - a) * i / 64.0));
    double err = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double x) { return std::exp(logf(x) - shift); }, a, b, 12, 1e-13, &err);
    return shift + std::log(v);
  };
  if (N == 3) {
    auto lf = [&](double z) {
      double s = 1.0 - z * z;
      return h[2] * z * z + log_circle_average(s * h[0], s * h[1]);
    };
    // even in z
    return logint(lf, 0.0, 1.0);
  }
  if (N == 4) {
    auto lf = [&](double t) {
      return log_circle_average(t * h[0], t * h[1]) + log_circle_average((1.0 - t) * h[2], (1.0 - t) * h[3]);
    };
    return logint(lf, 0.0, 1.0);
  }
  throw Error(ErrorCode::InvalidArgument, "sphere quadrature is implemented for N = 3, 4");
}

inline double radical_inverse(std::uint64_t i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * double(i % base);
    i /= base;
  }
  return r;
}

inline constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};

// Halton points (Cranley-Patterson shifted) pushed to the sphere through the Gaussian
// inverse CDF; returns (mean of G over shifts, standard error over shifts).
inline std::pair<double, double> sphere_G_sampling(const std::vector<double>& h, int samples, std::uint64_t seed,
                                                   int shifts = 8) {
  const int N = int(h.size());
  if (N > 4) throw Error(ErrorCode::InvalidArgument, "sampling is implemented for N <= 4");
  std::mt19937_64 rng(seed);
  std::vector<double> est(shifts);
  std::vector<double> v(N);
  auto inv_norm = [](double p) {
    p = std::clamp(p, 1e-300, 1.0 - 1e-16);
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
  };
  for (int s = 0; s < shifts; ++s) {
    std::vector<double> shift(N);
    for (int a = 0; a < N; ++a) shift[a] = double(rng() >> 11) * 0x1.0p-53;
    double mx = -kInf;
    std::vector<double> lv(samples);
    for (int i = 0; i < samples; ++i) {
      double nrm = 0.0;
      for (int a = 0; a < N; ++a) {
        double u = radical_inverse(std::uint64_t(i) + 1, kPrimes[a]) + shift[a];
        u -= std::floor(u);
        v[a] = inv_norm(u);
        nrm += v[a] * v[a];
      }
      double e = 0.0;
      for (int a = 0; a < N; ++a) e += h[a] * v[a] * v[a] / nrm;
      lv[i] = e;
      mx = std::max(mx, e);
    }
    double acc = 0.0;
    for (double e : lv) acc += std::exp(e - mx);
    est[s] = mx + std::log(acc / samples);
  }
  double mean = std::accumulate(est.begin(), est.end(), 0.0) / shifts;
  double var = 0.0;
  for (double e : est) var += (e - mean) * (e - mean);
  var /= std::max(1, shifts - 1);
  return {mean, std::sqrt(var / shifts)};
}

}  // namespace detail

/// G(h) for a diagonal traceless field.
inline double nematic_G(const std::vector<double>& h) { return detail::sphere_G_quadrature(h); }

/// Minimizes Psi_J(h) = |h|^2/(2J) - G(h) over a grid of traceless diagonal fields with
/// each of the first N-1 entries on [-J, J] (resolution+1 points); the last entry is
/// fixed by tracelessness. The grid minimum is polished by coordinate descent.
inline NematicOracleResult nematic_dual_min(int N, double J, int resolution, int sphere_samples = 0,
                                            SphereMethod method = SphereMethod::Quadrature, std::uint64_t seed = 1) {
  if (N < 3 || N > 4) throw Error(ErrorCode::InvalidArgument, "nematic oracle supports N = 3, 4");
  if (!(J > 0)) throw Error(ErrorCode::InvalidArgument, "J must be positive");
  if (resolution < 2) throw Error(ErrorCode::InvalidArgument, "resolution too small");
  double cells = std::pow(resolution + 1.0, N - 1);
  double per = method == SphereMethod::Sampling ? std::max(1, sphere_samples) * 8.0 : 200.0;
  if (cells * per > 2e10) throw Error(ErrorCode::BudgetExceeded, "nematic grid too large");
  if (method == SphereMethod::Sampling && sphere_samples < 16)
    throw Error(ErrorCode::InvalidArgument, "sampling needs at least 16 sphere samples");

  auto G = [&](const std::vector<double>& h) {
    if (method == SphereMethod::Quadrature) return detail::sphere_G_quadrature(h);
    return detail::sphere_G_sampling(h, sphere_samples, seed).first;
  };
  auto psi = [&](const std::vector<double>& h) {
    double n2 = 0.0;
    for (double x : h) n2 += x * x;
    return n2 / (2.0 * J) - G(h);
  };
  auto field = [&](const std::vector<int>& idx) {
    std::vector<double> h(N);
    double sum = 0.0;
    for (int a = 0; a < N - 1; ++a) {
      h[a] = -J + 2.0 * J * idx[a] / resolution;
      sum += h[a];
    }
    h[N - 1] = -sum;
    return h;
  };

  std::size_t total = std::size_t(cells);
  std::vector<double> vals(total);
  parallel_for(total, [&](std::size_t flat) {
    std::vector<int> idx(N - 1);
    std::size_t f = flat;
    for (int a = N - 2; a >= 0; --a) {
      idx[a] = int(f % (resolution + 1));
      f /= (resolution + 1);
    }
    vals[flat] = psi(field(idx));
  });
  std::size_t arg = 0;
  for (std::size_t i = 1; i < total; ++i)
    if (vals[i] < vals[arg]) arg = i;  // strict: lowest flat (lexicographic) index wins ties
  std::vector<int> idx(N - 1);
  {
    std::size_t f = arg;
    for (int a = N - 2; a >= 0; --a) {
      idx[a] = int(f % (resolution + 1));
      f /= (resolution + 1);
    }
  }
  std::vector<double> h = field(idx);

  // coordinate descent in the traceless directions e_a - e_b
  double best = psi(h);
  for (double step = J / resolution; step > 1e-9 * std::max(1.0, J); step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
          if (a == b) continue;
          h[a] += step;
          h[b] -= step;
          double v = psi(h);
          if (v < best - 1e-15) {
            best = v;
            improved = true;
          } else {
            h[a] -= step;
            h[b] += step;
          }
        }
    }
  }

  NematicOracleResult res;
  res.field.h = h;
  res.value = best;
  if (method == SphereMethod::Sampling) {
    res.stderr_G = detail::sphere_G_sampling(h, sphere_samples, seed).second;
    // cell scale: how much Psi moves over one grid step around the minimizer
    double cell = 2.0 * J / resolution;
    double scale = cell * cell / (2.0 * J);
    res.sampling_noise = res.stderr_G > scale;
  }
  return res;
}

/// Sorted components (descending) of a vector.
inline std::vector<double> sorted_desc(std::vector<double> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

/// Full-space minimum against the scalar solver, both put on a common anchored scale.
struct ReductionCheck {
  ModelSpec model;
  double J = 0.0;
  int resolution = 0;
  std::vector<double> minimizer;  // x (Potts), y then mu (cubic), h (nematic)
  double oracle_value = 0.0;      // anchored: cubic relative to the symmetric point
  double scalar_value = 0.0;      // global minimum of the scalar problem, same anchoring
  double scalar_m = 0.0;          // |m| of the scalar global minimizer
  double oracle_m = 0.0;          // on-axis magnetization read off the oracle minimizer
  double value_tol = 0.0;
  bool shape_ok = false;
  bool matched = false;
  bool sampling_noise = false;
};

/// Value tolerance at a given resolution: 1e-2 at 200, scaling as 1/resolution.
inline double oracle_value_tolerance(int resolution) { return 2.0 / resolution; }

inline ReductionCheck reduction_check(const ModelSpec& M, double J, int resolution, int sphere_samples = 0) {
  ReductionCheck rc;
  rc.model = M;
  rc.J = J;
  rc.resolution = resolution;
  rc.value_tol = oracle_value_tolerance(resolution);
  auto gm = solve_branches(M, J, M.kind == ModelKind::Nematic ? 600 : 2000).global_min();
  if (!gm) throw Error(ErrorCode::NoAsymmetricBranch, "scalar solver found no stable root");
  rc.scalar_m = std::fabs(gm->m);
  const double shape_tol = 4.0 / resolution;

  switch (M.kind) {
    case ModelKind::Potts: {
      auto r = potts_fullspace_min(M.param, J, resolution);
      rc.minimizer = r.point.x;
      rc.oracle_value = r.value;
      rc.scalar_value = gm->phi_full;
      rc.oracle_m = r.scalar_m;
      auto x = sorted_desc(r.point.x);
      rc.shape_ok = true;
      for (std::size_t k = 2; k < x.size(); ++k) rc.shape_ok &= std::fabs(x[k] - x[1]) <= shape_tol;
      // asymmetric minimizers satisfy J x_1 > 1 > J x_2
      if (x[0] - x[1] > shape_tol) rc.shape_ok &= J * x[0] > 1.0 - J * shape_tol && J * x[1] < 1.0 + J * shape_tol;
      break;
    }
    case ModelKind::Cubic: {
      auto r = cubic_fullspace_min(M.param, J, resolution);
      rc.minimizer = r.state.y;
      rc.minimizer.insert(rc.minimizer.end(), r.state.mu.begin(), r.state.mu.end());
      rc.oracle_value = r.value - r.value_symmetric;
      rc.scalar_value = gm->phi_full - full_phi(M, J, 0.0);
      rc.oracle_m = r.scalar_m;
      std::vector<std::size_t> idx(M.param);
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return r.state.y[a] > r.state.y[b]; });
      rc.shape_ok = true;
      for (std::size_t k = 1; k < idx.size(); ++k) {
        rc.shape_ok &= std::fabs(r.state.y[idx[k]] - r.state.y[idx[1]]) <= shape_tol;
        rc.shape_ok &= std::fabs(r.state.mu[idx[k]]) <= shape_tol;
      }
      if (r.state.y[idx[0]] - r.state.y[idx[1]] > shape_tol) rc.shape_ok &= std::fabs(r.state.mu[idx[0]]) > shape_tol;
      break;
    }
    case ModelKind::Nematic: {
      auto method = sphere_samples > 0 ? SphereMethod::Sampling : SphereMethod::Quadrature;
      auto r = nematic_dual_min(M.param, J, resolution, sphere_samples, method);
      rc.minimizer = r.field.h;
      rc.oracle_value = r.value;
      rc.scalar_value = gm->phi_full;  // |w|^2 phi_axis, zero at m = 0
      rc.sampling_noise = r.sampling_noise;
      auto h = sorted_desc(r.field.h);
      double tol = shape_tol * J;
      rc.shape_ok = true;
      for (std::size_t k = 2; k < h.size(); ++k) rc.shape_ok &= std::fabs(h[k] - h[1]) <= tol;
      // on-axis field h = J lambda w, so lambda = (h_1 - h_2) (N-1) / (J N)
      rc.oracle_m = (h[0] - h[1]) * (M.param - 1.0) / (J * M.param);
      break;
    }
  }
  rc.matched = rc.shape_ok && std::fabs(rc.oracle_value - rc.scalar_value) <= rc.value_tol;
  return rc;
}

}  // namespace mft

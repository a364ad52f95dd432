#pragma once

// Brillouin-zone integrals of the simple random walk on Z^d:
//   W_d = <1/D(k)>,  I_d = <(1 - D(k))^2 / D(k)>,   D(k) = 1 - (1/d) sum_j cos k_j,
// where <.> is the normalized average over [-pi, pi]^d. Since <D> = 1, I_d = W_d - 1.

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "error.hpp"
#include "special.hpp"

namespace mft {

enum class IdMethod { NestedQuadrature, BesselProduct };
enum class IdPath { Direct, FromWatson };

inline std::string to_string(IdMethod m) {
  return m == IdMethod::NestedQuadrature ? "NestedQuadrature" : "BesselProduct";
}

struct IdEstimate {
  int d = 0;
  double value = 0.0;     // I_d
  double wd_value = 0.0;  // W_d
  IdMethod method = IdMethod::BesselProduct;
  double abs_error_estimate = 0.0;
};

namespace detail {

inline void check_dim(int d, IdMethod method) {
  if (d < 3) throw Error(ErrorCode::DimensionTooSmall, "d = " + std::to_string(d) + " (the integral diverges for d < 3)");
  if (method == IdMethod::NestedQuadrature && d > 4)
    throw Error(ErrorCode::MethodInfeasible, "nested quadrature is limited to d <= 4");
}

inline void check_tol(double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
}

// Substituting t = d u in W_d = int_0^inf e^{-t} I0(t/d)^d dt gives d * int_0^inf i0e(u)^d du.
// exp_sinh copes with the algebraic u^{-d/2} tail directly, no cutoff needed.
inline IdEstimate bessel_product(int d, double tol, bool direct_id) {
  boost::math::quadrature::exp_sinh<double> integrator(12);
  double err = 0.0, l1 = 0.0;
  auto wd_integrand = [d](double u) { return std::pow(i0e(u), d); };
  double w = d * integrator.integrate(wd_integrand, 0.0, kInf, 1e-14, &err, &l1);
  double w_err = d * err;

  double id = w - 1.0, id_err = w_err;
  if (direct_id) {
    // the e^{-du} subtraction integrates to exactly 1/d; doing it under the integral
    // avoids the cancellation in W_d - 1 for large d
    auto id_integrand = [d](double u) {
      double p = std::pow(i0e(u), d), e = std::exp(-d * u);
      return p - e;
    };
    double e2 = 0.0;
    id = d * integrator.integrate(id_integrand, 0.0, kInf, 1e-14, &e2, &l1);
    id_err = d * e2;
  }
  double est = std::max({w_err, id_err, 1e-15});
  if (!(est <= tol))
    throw Error(ErrorCode::QuadratureFailure, "Bessel-product error estimate " + std::to_string(est) + " exceeds tol");
  return {d, id, w, IdMethod::BesselProduct, est};
}

// The k_d integral is done in closed form:
//   (1/pi) int_0^pi dk / (a - cos k) = 1 / sqrt(a^2 - 1),   a = d - sum_{j<d} cos k_j,
// which leaves a (d-1)-fold tanh-sinh integral over [0, pi]^{d-1} (by evenness) with an
// integrable 1/|k| corner singularity; tanh-sinh clusters nodes there on its own.
inline IdEstimate nested(int d, double tol, bool direct_id) {
  const int outer = d - 1;
  boost::math::quadrature::tanh_sinh<double> ts(15);
  double inner_tol = std::min(1e-9, tol * 1e-2);
  double worst_err = 0.0;

  // amc = a - 1 = sum 2 sin^2(k_j/2), exact near the singular corner
  auto kernel = [d, direct_id](double amc) {
    // nodes can sit so close to the corner that sin^2 underflows
    amc = std::max(amc, std::numeric_limits<double>::min());
    double a = 1.0 + amc;
    double root = std::sqrt(amc * (a + 1.0));
    double w = d / root;
    return direct_id ? w - 2.0 + a / d : w;
  };

  std::function<double(int, double)> level = [&](int depth, double amc) -> double {
    if (depth == outer) return kernel(amc);
    double err = 0.0;
    auto f = [&](double k) {
      double s = std::sin(0.5 * k);
      return level(depth + 1, amc + 2.0 * s * s);
    };
    double v = ts.integrate(f, 0.0, M_PI, inner_tol, &err);
    if (depth == 0) worst_err = err;
    return v / M_PI;
  };

  double w = level(0, 0.0);
  // top-level relative error estimate times the value; inner levels run tighter
  double est = std::max(worst_err * std::fabs(w), 1e-15);
  if (!(est <= tol))
    throw Error(ErrorCode::QuadratureFailure, "nested quadrature error estimate " + std::to_string(est) + " exceeds tol");
  IdEstimate r{d, 0.0, 0.0, IdMethod::NestedQuadrature, est};
  if (direct_id) {
    r.value = w;  // caller fills wd_value
  } else {
    r.wd_value = w;
    r.value = w - 1.0;
  }
  return r;
}

}  // namespace detail

/// W_d (and I_d = W_d - 1) by the requested method.
inline IdEstimate compute_wd(int d, IdMethod method = IdMethod::BesselProduct, double tol = 1e-8) {
  detail::check_dim(d, method);
  detail::check_tol(tol);
  if (method == IdMethod::BesselProduct) return detail::bessel_product(d, tol, false);
  return detail::nested(d, tol, false);
}

/// I_d either integrated directly ((1-D)^2/D under the integral) or as W_d - 1.
inline IdEstimate compute_id(int d, IdMethod method = IdMethod::BesselProduct, double tol = 1e-8,
                             IdPath path = IdPath::Direct) {
  detail::check_dim(d, method);
  detail::check_tol(tol);
  if (path == IdPath::FromWatson) return compute_wd(d, method, tol);
  if (method == IdMethod::BesselProduct) return detail::bessel_product(d, tol, true);
  IdEstimate direct = detail::nested(d, tol, true);
  IdEstimate w = detail::nested(d, tol, false);
  direct.wd_value = w.wd_value;
  direct.abs_error_estimate = std::max(direct.abs_error_estimate, w.abs_error_estimate);
  return direct;
}

/// Default method: nested quadrature is exponential in d, so it is only an option for d <= 4.
inline IdMethod default_id_method(int) { return IdMethod::BesselProduct; }

}  // namespace mft

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "dwld/design.hpp"
#include "dwld/types.hpp"

namespace dwld {

struct SolverOptions {
  int max_iters = 50000;
  double rel_tol = 1e-10;   // iterate relative-change trigger for certificate checks
  double kkt_tol = 1e-6;    // optimality certificate threshold
  double step_size = 0.0;   // <= 0 means 1 / lipschitz_constant(A)
};

struct SolveInfo {
  int iterations = 0;
  int restarts = 0;
  double kkt_residual = std::numeric_limits<double>::quiet_NaN();
  double objective = std::numeric_limits<double>::quiet_NaN();
  double step_size = std::numeric_limits<double>::quiet_NaN();
};

/// Per-iteration hook (iteration, objective, KKT residual); intended for
/// instrumented runs, adds an adjoint product per iteration.
using IterationCallback = std::function<void(int, double, double)>;

/// Complex soft threshold: z * max(0, 1 - t/|z|), with the tie |z| = t
/// mapping to exactly 0.
inline Complex soft_threshold(Complex z, double t) {
  const double mag = std::abs(z);
  if (mag <= t) return Complex(0.0, 0.0);
  return z * (1.0 - t / mag);
}

/// (1/2)||y - Ax||^2 + sum_i lambda_i |x_i|.
inline double wlasso_objective(const ComplexVector& x, const ComplexVector& y,
                               const DesignMatrix& a, const RealVector& lambda) {
  double penalty = 0.0;
  for (Index i = 0; i < x.size(); ++i) penalty += lambda[i] * std::abs(x[i]);
  return 0.5 * (y - apply(a, x)).squaredNorm() + penalty;
}

namespace detail {

inline void validate_wlasso_inputs(const ComplexVector& y, const DesignMatrix& a,
                                   const RealVector& lambda) {
  if (y.size() != a.rows()) throw DimensionError("weighted lasso: y length != M");
  if (lambda.size() != a.cols()) throw DimensionError("weighted lasso: lambda length != N");
  for (Index i = 0; i < lambda.size(); ++i)
    if (!(lambda[i] >= 0.0) || !std::isfinite(lambda[i]))
      throw InvalidParameterError("weighted lasso: weights must be finite and >= 0");
}

/// Subgradient optimality residual given g = A^H(Ax - y).
inline double kkt_from_gradient(const ComplexVector& x, const ComplexVector& g,
                                const RealVector& lambda) {
  double worst = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double mag = std::abs(x[i]);
    double r;
    if (mag > 0.0) {
      r = std::abs(g[i] + lambda[i] * (x[i] / mag));
    } else {
      r = std::max(0.0, std::abs(g[i]) - lambda[i]);
    }
    worst = std::max(worst, r);
  }
  return worst;
}

}  // namespace detail

/// max_i of |g_i + lambda_i x_i/|x_i|| on the support and max(0, |g_i| - lambda_i)
/// off it, with g = A^H(Ax - y). Zero iff x solves the weighted LASSO.
inline double kkt_residual(const ComplexVector& x, const ComplexVector& y, const DesignMatrix& a,
                           const RealVector& lambda) {
  detail::validate_wlasso_inputs(y, a, lambda);
  if (x.size() != a.cols()) throw DimensionError("kkt_residual: x length != N");
  const ComplexVector g = apply_adjoint(a, apply(a, x) - y);
  return detail::kkt_from_gradient(x, g, lambda);
}

/// Accelerated proximal gradient (FISTA) with restart-on-increase, run until
/// the KKT residual certifies optimality. Deterministic given its inputs.
///
/// A@<momentum point> is propagated through the momentum linear combination,
/// so an iteration costs one forward and one adjoint product; it is recomputed
/// exactly every 64 iterations to stop rounding drift.
inline ComplexVector solve_weighted_lasso(const ComplexVector& y, const DesignMatrix& a,
                                          const RealVector& lambda,
                                          const SolverOptions& opts = {},
                                          SolveInfo* info = nullptr,
                                          const IterationCallback& callback = {}) {
  detail::validate_wlasso_inputs(y, a, lambda);
  if (opts.max_iters < 1) throw InvalidParameterError("weighted lasso: max_iters must be >= 1");
  if (!(opts.kkt_tol > 0.0) || !(opts.rel_tol > 0.0))
    throw InvalidParameterError("weighted lasso: tolerances must be positive");

  const Index n = a.cols();
  const double step = opts.step_size > 0.0 ? opts.step_size : 1.0 / lipschitz_constant(a);

  auto penalty_of = [&](const ComplexVector& x) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += lambda[i] * std::abs(x[i]);
    return s;
  };
  auto prox_step = [&](const ComplexVector& point, const ComplexVector& grad) {
    ComplexVector z(n);
    for (Index i = 0; i < n; ++i) z[i] = soft_threshold(point[i] - step * grad[i], step * lambda[i]);
    return z;
  };

  ComplexVector x_prev = ComplexVector::Zero(n);
  ComplexVector ax_prev = ComplexVector::Zero(a.rows());
  ComplexVector v = x_prev;    // momentum point
  ComplexVector av = ax_prev;  // A v
  double f_prev = 0.5 * y.squaredNorm();
  double t = 1.0;
  int restarts = 0;
  double kkt = std::numeric_limits<double>::quiet_NaN();

  const int check_interval = 10;

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    ComplexVector grad = apply_adjoint(a, av - y);
    ComplexVector z = prox_step(v, grad);
    ComplexVector az = apply(a, z);
    double f_z = 0.5 * (y - az).squaredNorm() + penalty_of(z);

    if (f_z > f_prev) {
      // Momentum overshot: restart from the last accepted iterate. The plain
      // proximal step cannot increase the objective at step <= 1/L.
      v = x_prev;
      av = ax_prev;
      t = 1.0;
      ++restarts;
      grad = apply_adjoint(a, av - y);
      z = prox_step(v, grad);
      az = apply(a, z);
      f_z = 0.5 * (y - az).squaredNorm() + penalty_of(z);
    }

    const double rel_change = (z - x_prev).norm() / std::max(1.0, z.norm());

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    v = z + beta * (z - x_prev);
    av = az + beta * (az - ax_prev);
    x_prev = std::move(z);
    ax_prev = std::move(az);
    f_prev = f_z;
    t = t_next;

    const bool check_now = callback || iter % check_interval == 0 || iter == opts.max_iters ||
                           rel_change <= opts.rel_tol;
    if (check_now) {
      const ComplexVector g_at_x = apply_adjoint(a, ax_prev - y);
      kkt = detail::kkt_from_gradient(x_prev, g_at_x, lambda);
      if (callback) callback(iter, f_prev, kkt);
      if (kkt <= opts.kkt_tol) {
        if (info) *info = {iter, restarts, kkt, f_prev, step};
        return x_prev;
      }
    }

    if (iter % 64 == 0) av = apply(a, v);  // resync the propagated product
  }

  throw ConvergenceError("weighted lasso did not reach the KKT tolerance within max_iters", kkt,
                         opts.max_iters);
}

}  // namespace dwld

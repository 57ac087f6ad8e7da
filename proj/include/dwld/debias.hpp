#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "dwld/design.hpp"
#include "dwld/types.hpp"
#include "dwld/wlasso.hpp"

namespace dwld {

struct FixedPointResult {
  double lambda_cro = 0.0;  // debiasing coefficient
  double rho_ca = 0.0;      // weighted active component density
  int iterations = 0;
  double residual = 0.0;    // |Lambda (1 - rho) - (gamma - rho)| at the solution
};

namespace detail {

struct ActiveEntry {
  double magnitude;
  double weight;
};

inline std::vector<ActiveEntry> active_entries(const ComplexVector& x_wl,
                                               const RealVector& lambda) {
  // Heaviside convention: exact zeros contribute nothing.
  std::vector<ActiveEntry> active;
  for (Index i = 0; i < x_wl.size(); ++i) {
    const double mag = std::abs(x_wl[i]);
    if (mag > 0.0) active.push_back({mag, lambda[i]});
  }
  return active;
}

inline double rho_of(const std::vector<ActiveEntry>& active, Index n, double lambda_cro) {
  double sum = 0.0;
  for (const auto& e : active) sum += 2.0 - e.weight / (lambda_cro * e.magnitude + e.weight);
  return sum / (2.0 * static_cast<double>(n));
}

}  // namespace detail

/// Solves the coupled pair
///   Lambda = (gamma - rho) / (1 - rho)
///   rho    = (1/2N) sum_i [2 - lambda_i / (Lambda |x_i| + lambda_i)] Theta(|x_i|)
/// by damped iteration from Lambda = gamma, falling back to bisection. The
/// composed map is strictly decreasing in Lambda, so the positive fixed point
/// is unique; it exists iff rho stays below gamma as Lambda -> 0.
inline FixedPointResult solve_fixed_point(const ComplexVector& x_wl, const RealVector& lambda,
                                          double gamma) {
  if (lambda.size() != x_wl.size()) throw DimensionError("solve_fixed_point: length mismatch");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw InvalidParameterError("solve_fixed_point: gamma must lie in (0, 1]");

  const Index n = x_wl.size();
  const auto active = detail::active_entries(x_wl, lambda);
  if (active.empty()) return {gamma, 0.0, 0, 0.0};

  // Limit of rho as Lambda -> 0+: 1/(2N) per active entry with a positive
  // weight, 2/(2N) per active entry with zero weight.
  double rho_floor = 0.0;
  for (const auto& e : active) rho_floor += e.weight > 0.0 ? 1.0 : 2.0;
  rho_floor /= 2.0 * static_cast<double>(n);
  if (rho_floor >= gamma) throw DebiasInfeasibleError(rho_floor, gamma);

  auto target = [&](double lam) {
    const double rho = detail::rho_of(active, n, lam);
    return (gamma - rho) / (1.0 - rho);
  };
  auto residual_at = [&](double lam) {
    const double rho = detail::rho_of(active, n, lam);
    return std::abs(lam * (1.0 - rho) - (gamma - rho));
  };

  const double tol = 1e-12;
  double lam = gamma;
  int iterations = 0;
  constexpr int max_damped = 1000;
  constexpr double damping = 0.5;
  bool converged = false;
  for (; iterations < max_damped; ++iterations) {
    if (residual_at(lam) < tol) {
      converged = true;
      break;
    }
    lam = std::max((1.0 - damping) * lam + damping * target(lam), 1e-12);
  }

  if (!converged) {
    // h(lam) = lam - target(lam) is increasing, negative near 0 and
    // nonnegative at gamma.
    double lo = 1e-8, hi = gamma;
    if (lo - target(lo) > 0.0) lo = 1e-14;
    for (int b = 0; b < 200 && hi - lo > 1e-16; ++b) {
      const double mid = 0.5 * (lo + hi);
      ((mid - target(mid) < 0.0) ? lo : hi) = mid;
      ++iterations;
      if (residual_at(mid) < tol) {
        lam = mid;
        converged = true;
        break;
      }
    }
    if (!converged) lam = 0.5 * (lo + hi);
  }

  const double rho = detail::rho_of(active, n, lam);
  const double res = residual_at(lam);
  if (!converged && res > 1e-10)
    throw ConvergenceError("fixed point iteration stalled", res, iterations);
  if (rho >= gamma || lam <= 0.0) throw DebiasInfeasibleError(rho, gamma);
  return {lam, rho, iterations, res};
}

/// x_d = x_wl + (1/Lambda) A^H (y - A x_wl).
inline ComplexVector debias_estimate(const ComplexVector& x_wl, const ComplexVector& y,
                                     const DesignMatrix& a, double lambda_cro) {
  if (x_wl.size() != a.cols()) throw DimensionError("debias_estimate: x length != N");
  if (y.size() != a.rows()) throw DimensionError("debias_estimate: y length != M");
  if (!(lambda_cro > 0.0))
    throw InvalidParameterError("debias_estimate: coefficient must be positive");
  return x_wl + apply_adjoint(a, y - apply(a, x_wl)) / lambda_cro;
}

/// Gaussian-design debiasing with Lambda_G = gamma - rho_a, where rho_a is
/// the fraction of nonzero entries of x_wl.
inline ComplexVector debias_gaussian(const ComplexVector& x_wl, const ComplexVector& y,
                                     const DesignMatrix& a) {
  if (a.kind != MatrixKind::GaussianIID)
    throw InvalidParameterError("debias_gaussian: design must be GaussianIID");
  Index active = 0;
  for (Index i = 0; i < x_wl.size(); ++i)
    if (std::abs(x_wl[i]) > 0.0) ++active;
  const double rho_a = static_cast<double>(active) / static_cast<double>(x_wl.size());
  const double gamma = a.gamma();
  if (rho_a >= gamma) throw DebiasInfeasibleError(rho_a, gamma);
  return debias_estimate(x_wl, y, a, gamma - rho_a);
}

struct ResidualVariance {
  double sigma_w2 = 0.0;
  double rss_bar = 0.0;
};

/// sigma_w^2 = gamma (1 - gamma) / (gamma - rho)^2 * RSSbar + sigma2,
/// RSSbar = ||y - A x_wl||^2 / M. At gamma = 1 this is exactly sigma2.
inline ResidualVariance residual_variance(const ComplexVector& x_wl, const ComplexVector& y,
                                          const DesignMatrix& a, double gamma, double rho_ca,
                                          double sigma2) {
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw InvalidParameterError("residual_variance: gamma must lie in (0, 1]");
  if (rho_ca >= gamma) throw DebiasInfeasibleError(rho_ca, gamma);
  if (!(sigma2 >= 0.0)) throw InvalidParameterError("residual_variance: sigma2 must be >= 0");
  const double rss_bar = (y - apply(a, x_wl)).squaredNorm() / static_cast<double>(a.rows());
  const double coeff = gamma * (1.0 - gamma) / ((gamma - rho_ca) * (gamma - rho_ca));
  return {coeff * rss_bar + sigma2, rss_bar};
}

struct DebiasResult {
  ComplexVector x_d;
  double lambda_cro = 0.0;
  double rho_ca = 0.0;
  double sigma_w2 = 0.0;
  double rss_bar = 0.0;
  int iterations = 0;
};

/// Fixed point + debiased estimate + residual variance in one call.
inline DebiasResult debias_pipeline(const ComplexVector& x_wl, const ComplexVector& y,
                                    const DesignMatrix& a, const RealVector& lambda,
                                    double sigma2) {
  const double gamma = a.gamma();
  const FixedPointResult fp = solve_fixed_point(x_wl, lambda, gamma);
  ComplexVector x_d = debias_estimate(x_wl, y, a, fp.lambda_cro);
  const ResidualVariance rv = residual_variance(x_wl, y, a, gamma, fp.rho_ca, sigma2);
  return {std::move(x_d), fp.lambda_cro, fp.rho_ca, rv.sigma_w2, rv.rss_bar, fp.iterations};
}

}  // namespace dwld

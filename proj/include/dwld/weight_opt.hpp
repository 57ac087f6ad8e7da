#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "dwld/debias.hpp"
#include "dwld/parallel.hpp"
#include "dwld/scene.hpp"
#include "dwld/stats.hpp"
#include "dwld/types.hpp"
#include "dwld/wlasso.hpp"

namespace dwld {

inline constexpr double kWeightFloor = 1e-4;  // lambda_min clamp
inline constexpr double kPriorFloor = 1e-3;   // p_min clamp for the exponential model

enum class WeightModelKind { Linear, Exponential };

inline const char* to_string(WeightModelKind kind) {
  return kind == WeightModelKind::Linear ? "linear" : "exponential";
}

/// Two-parameter weight family over the prior:
///   Linear:      lambda_i = max(lambda_min, lambda0 - alpha p_i)
///   Exponential: lambda_i = max(lambda_min, lambda0 / max(p_i, p_min)^alpha)
struct WeightModel {
  WeightModelKind kind = WeightModelKind::Linear;
  double lambda0 = 0.1;
  double alpha = 0.0;

  RealVector weights(const RealVector& prior) const {
    if (!(lambda0 > 0.0)) throw InvalidParameterError("weight model: lambda0 must be > 0");
    RealVector w(prior.size());
    for (Index i = 0; i < prior.size(); ++i) {
      const double p = prior[i];
      const double raw = kind == WeightModelKind::Linear
                             ? lambda0 - alpha * p
                             : lambda0 / std::pow(std::max(p, kPriorFloor), alpha);
      w[i] = std::max(kWeightFloor, raw);
    }
    return w;
  }
};

struct ObjectiveEstimate {
  double mean_sigma_w2 = std::numeric_limits<double>::quiet_NaN();
  double std_error = 0.0;
  int n_trials = 0;
  int n_failed = 0;
};

/// Monte Carlo estimate of the expected residual variance sigma_w^2 under the
/// scene's prior: draw (A, x0, xi), solve the weighted LASSO, run the fixed
/// point and the variance formula. Seeding is keyed by (seed, trial), so two
/// evaluations with the same seed share random numbers exactly.
///
/// Infeasible trials (and the rare non-converged solve) are kept with a
/// penalty of 10x the worst feasible value in this evaluation; dropping them
/// would bias the search toward over-dense solutions.
inline ObjectiveEstimate evaluate_f2(const WeightModel& model, const SceneConfig& scene,
                                     int n_mc, std::uint64_t seed, int n_threads = 1,
                                     const SolverOptions& opts = {}) {
  validate(scene);
  if (n_mc < 1) throw InvalidParameterError("evaluate_f2: n_mc must be >= 1");
  const RealVector lambda = model.weights(scene.prior);
  const double gamma = scene.gamma();

  std::vector<std::optional<double>> per_trial(static_cast<std::size_t>(n_mc));
  parallel_for(n_mc, n_threads, [&](Index t) {
    Rng rng = make_rng(derive_seed(seed, 0x6f32, static_cast<std::uint64_t>(t)));
    const DesignMatrix a = gen_design(scene, rng, /*materialize=*/false);
    auto [x0, support] = gen_sparse_signal(scene.prior, scene.sigma_x2, rng);
    const ComplexVector y = measure(a, x0, scene.noise, rng);
    try {
      const ComplexVector x_wl = solve_weighted_lasso(y, a, lambda, opts);
      const FixedPointResult fp = solve_fixed_point(x_wl, lambda, gamma);
      const ResidualVariance rv =
          residual_variance(x_wl, y, a, gamma, fp.rho_ca, scene.noise.sigma2);
      per_trial[static_cast<std::size_t>(t)] = rv.sigma_w2;
    } catch (const DebiasInfeasibleError&) {
    } catch (const ConvergenceError&) {
    }
  });

  double worst_feasible = 0.0;
  int n_failed = 0;
  for (const auto& v : per_trial) {
    if (v)
      worst_feasible = std::max(worst_feasible, *v);
    else
      ++n_failed;
  }
  if (n_failed == n_mc)
    throw ObjectiveUndefinedError("evaluate_f2: every trial was infeasible");

  const double penalty = 10.0 * worst_feasible;
  std::vector<double> values;
  values.reserve(per_trial.size());
  for (const auto& v : per_trial) values.push_back(v ? *v : penalty);
  const MeanStdError ms = mean_std_error(values);
  return {ms.mean, ms.std_error, n_mc, n_failed};
}

namespace detail {

struct EvalPoint {
  double lambda0;
  double alpha;
  ObjectiveEstimate estimate;
};

inline double clamp_lambda0(double v) { return std::clamp(v, kWeightFloor, 100.0); }
inline double clamp_alpha(double v) { return std::clamp(v, -10.0, 10.0); }

}  // namespace detail

/// Coarse grid over (lambda0, alpha) followed by Nelder-Mead refinement from
/// the best grid point. Every objective evaluation reuses the same seed
/// (common random numbers), so the returned objective is comparable across
/// points and the whole search is deterministic.
inline std::pair<WeightModel, ObjectiveEstimate> optimize_weights(
    WeightModelKind kind, const SceneConfig& scene, int budget, std::uint64_t seed,
    int n_mc = 64, int n_threads = 1, const SolverOptions& opts = {}) {
  if (budget < 25) throw InvalidParameterError("optimize_weights: budget must be >= 25");

  int evals_used = 0;
  detail::EvalPoint best{0.0, 0.0, {}};
  best.estimate.mean_sigma_w2 = std::numeric_limits<double>::infinity();

  auto evaluate = [&](double lambda0, double alpha) {
    lambda0 = detail::clamp_lambda0(lambda0);
    alpha = detail::clamp_alpha(alpha);
    const WeightModel model{kind, lambda0, alpha};
    const ObjectiveEstimate est = evaluate_f2(model, scene, n_mc, seed, n_threads, opts);
    ++evals_used;
    if (est.mean_sigma_w2 < best.estimate.mean_sigma_w2) best = {lambda0, alpha, est};
    return est.mean_sigma_w2;
  };

  // Grid scan: lambda0 log-spaced in [0.01, 0.5], alpha linear in [0, 1].
  const bool small_budget = budget < 58;
  const int n_lambda0 = small_budget ? 4 : 8;
  const int n_alpha = small_budget ? 3 : 6;
  for (int i = 0; i < n_lambda0; ++i) {
    const double f = static_cast<double>(i) / (n_lambda0 - 1);
    const double lambda0 = 0.01 * std::pow(0.5 / 0.01, f);
    for (int j = 0; j < n_alpha; ++j) {
      const double alpha = static_cast<double>(j) / (n_alpha - 1);
      evaluate(lambda0, alpha);
    }
  }

  // Nelder-Mead on (lambda0, alpha) from the best grid point.
  using Point = std::array<double, 2>;
  struct Vertex {
    Point p;
    double f;
  };
  auto eval_point = [&](const Point& p) { return evaluate(p[0], p[1]); };

  const double step_l = std::max(0.25 * best.lambda0, 0.005);
  const double step_a = 0.1;
  std::array<Vertex, 3> simplex{
      Vertex{{best.lambda0, best.alpha}, best.estimate.mean_sigma_w2},
      Vertex{{best.lambda0 + step_l, best.alpha}, 0.0},
      Vertex{{best.lambda0, best.alpha + step_a}, 0.0}};
  simplex[1].f = eval_point(simplex[1].p);
  simplex[2].f = eval_point(simplex[2].p);

  const int max_nm_iters = std::min(100, budget - evals_used);
  for (int it = 0; it < max_nm_iters && evals_used < budget; ++it) {
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    const Point b0 = simplex[0].p;
    const Point b1 = simplex[1].p;
    const Point centroid{0.5 * (b0[0] + b1[0]), 0.5 * (b0[1] + b1[1])};
    const Point w = simplex[2].p;

    auto combine = [&](double c) {
      return Point{centroid[0] + c * (centroid[0] - w[0]), centroid[1] + c * (centroid[1] - w[1])};
    };

    const Point refl = combine(1.0);
    const double f_refl = eval_point(refl);
    if (f_refl < simplex[0].f) {
      const Point expa = combine(2.0);
      const double f_expa = evals_used < budget ? eval_point(expa) : f_refl + 1.0;
      simplex[2] = f_expa < f_refl ? Vertex{expa, f_expa} : Vertex{refl, f_refl};
    } else if (f_refl < simplex[1].f) {
      simplex[2] = {refl, f_refl};
    } else {
      const Point contr = combine(-0.5);
      const double f_contr = evals_used < budget ? eval_point(contr) : f_refl + 1.0;
      if (f_contr < simplex[2].f) {
        simplex[2] = {contr, f_contr};
      } else {
        // Shrink toward the best vertex.
        for (int k = 1; k < 3 && evals_used < budget; ++k) {
          simplex[k].p = {0.5 * (simplex[k].p[0] + simplex[0].p[0]),
                          0.5 * (simplex[k].p[1] + simplex[0].p[1])};
          simplex[k].f = eval_point(simplex[k].p);
        }
      }
    }

    const double spread = std::abs(simplex[2].f - simplex[0].f);
    if (spread <= 1e-12 * std::max(1.0, std::abs(simplex[0].f))) break;
  }

  return {WeightModel{kind, best.lambda0, best.alpha}, best.estimate};
}

}  // namespace dwld

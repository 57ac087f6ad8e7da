#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>

#include "dwld/debias.hpp"
#include "dwld/stats.hpp"
#include "dwld/types.hpp"
#include "dwld/wlasso.hpp"

namespace dwld {

using DecisionVector = BoolArray;  // phi_i = true rejects H_{0,i}

/// kappa_i = -sigma_w^2 ln(pfa_i). Requires pfa in (0, 1].
inline RealVector threshold_from_pfa(double sigma_w2, const RealVector& pfa) {
  if (!(sigma_w2 > 0.0)) throw InvalidParameterError("threshold_from_pfa: sigma_w2 must be > 0");
  RealVector kappa(pfa.size());
  for (Index i = 0; i < pfa.size(); ++i) {
    if (!(pfa[i] > 0.0 && pfa[i] <= 1.0))
      throw InvalidParameterError("threshold_from_pfa: pfa must lie in (0, 1]");
    kappa[i] = -sigma_w2 * std::log(pfa[i]);
  }
  return kappa;
}

/// phi_i = 1 iff |x_i|^2 > kappa_i; ties decide "no detection".
inline DecisionVector threshold_detect(const ComplexVector& x, const RealVector& kappa) {
  if (x.size() != kappa.size()) throw DimensionError("threshold_detect: length mismatch");
  DecisionVector phi(x.size());
  for (Index i = 0; i < x.size(); ++i) phi[i] = std::norm(x[i]) > kappa[i];
  return phi;
}

inline DecisionVector dwld_detect(const ComplexVector& x_d, const RealVector& kappa) {
  return threshold_detect(x_d, kappa);
}

inline DecisionVector nwld_detect(const ComplexVector& x_wl, const RealVector& kappa_wl) {
  return threshold_detect(x_wl, kappa_wl);
}

inline BoolArray support_mask(const IndexSet& support, Index n) {
  BoolArray mask = BoolArray::Constant(n, false);
  for (Index i : support) {
    if (i < 0 || i >= n) throw DimensionError("support_mask: index out of range");
    mask[i] = true;
  }
  return mask;
}

struct PooledRates {
  std::optional<double> pfa;  // nullopt when no null occurrences were seen
  std::optional<double> pd;
  std::int64_t null_occurrences = 0;
  std::int64_t null_rejections = 0;
  std::int64_t support_occurrences = 0;
  std::int64_t support_rejections = 0;
};

/// Per-entry decision counters over trials. Merging independently filled
/// accumulators is associative and commutative, so trials may run in
/// parallel and be reduced in any order.
class MetricsAccumulator {
 public:
  using Counter = Eigen::Array<std::int64_t, Eigen::Dynamic, 1>;

  MetricsAccumulator() = default;
  explicit MetricsAccumulator(Index n)
      : rejections_on_null_(Counter::Zero(n)),
        null_occurrences_(Counter::Zero(n)),
        rejections_on_support_(Counter::Zero(n)),
        support_occurrences_(Counter::Zero(n)) {}

  Index size() const { return null_occurrences_.size(); }

  void add(const DecisionVector& decisions, const BoolArray& support) {
    if (size() == 0) *this = MetricsAccumulator(decisions.size());
    if (decisions.size() != size() || support.size() != size())
      throw DimensionError("metrics: length mismatch");
    for (Index i = 0; i < size(); ++i) {
      if (support[i]) {
        ++support_occurrences_[i];
        if (decisions[i]) ++rejections_on_support_[i];
      } else {
        ++null_occurrences_[i];
        if (decisions[i]) ++rejections_on_null_[i];
      }
    }
  }

  void merge(const MetricsAccumulator& other) {
    if (other.size() == 0) return;
    if (size() == 0) {
      *this = other;
      return;
    }
    if (other.size() != size()) throw DimensionError("metrics: merge size mismatch");
    rejections_on_null_ += other.rejections_on_null_;
    null_occurrences_ += other.null_occurrences_;
    rejections_on_support_ += other.rejections_on_support_;
    support_occurrences_ += other.support_occurrences_;
  }

  /// Ratio estimator for entry i; nullopt when the entry was never null.
  std::optional<double> per_entry_pfa(Index i) const {
    if (null_occurrences_[i] == 0) return std::nullopt;
    return static_cast<double>(rejections_on_null_[i]) /
           static_cast<double>(null_occurrences_[i]);
  }

  std::optional<double> per_entry_pd(Index i) const {
    if (support_occurrences_[i] == 0) return std::nullopt;
    return static_cast<double>(rejections_on_support_[i]) /
           static_cast<double>(support_occurrences_[i]);
  }

  /// Pooled totals: counters summed over entries before the ratio.
  PooledRates pooled() const {
    PooledRates rates;
    rates.null_occurrences = null_occurrences_.sum();
    rates.null_rejections = rejections_on_null_.sum();
    rates.support_occurrences = support_occurrences_.sum();
    rates.support_rejections = rejections_on_support_.sum();
    if (rates.null_occurrences > 0)
      rates.pfa = static_cast<double>(rates.null_rejections) /
                  static_cast<double>(rates.null_occurrences);
    if (rates.support_occurrences > 0)
      rates.pd = static_cast<double>(rates.support_rejections) /
                 static_cast<double>(rates.support_occurrences);
    return rates;
  }

  const Counter& rejections_on_null() const { return rejections_on_null_; }
  const Counter& null_occurrences() const { return null_occurrences_; }
  const Counter& rejections_on_support() const { return rejections_on_support_; }
  const Counter& support_occurrences() const { return support_occurrences_; }

 private:
  Counter rejections_on_null_;
  Counter null_occurrences_;
  Counter rejections_on_support_;
  Counter support_occurrences_;
};

struct DetectionPipelineResult {
  DecisionVector decisions;
  DebiasResult debias;
  ComplexVector x_wl;
  RealVector kappa;
};

/// Full debiased detection chain: weighted LASSO, fixed point, debias,
/// analytic thresholds, decisions.
inline DetectionPipelineResult dwld_pipeline(const ComplexVector& y, const DesignMatrix& a,
                                             const RealVector& lambda, const RealVector& pfa,
                                             double sigma2, const SolverOptions& opts = {}) {
  DetectionPipelineResult out;
  out.x_wl = solve_weighted_lasso(y, a, lambda, opts);
  out.debias = debias_pipeline(out.x_wl, y, a, lambda, sigma2);
  out.kappa = threshold_from_pfa(out.debias.sigma_w2, pfa);
  out.decisions = dwld_detect(out.debias.x_d, out.kappa);
  return out;
}

/// Non-weighted baseline: the same chain with lambda_i = lambda_scalar.
inline DetectionPipelineResult dld_pipeline(const ComplexVector& y, const DesignMatrix& a,
                                            double lambda_scalar, double pfa, double sigma2,
                                            const SolverOptions& opts = {}) {
  if (!(lambda_scalar > 0.0)) throw InvalidParameterError("dld_pipeline: lambda must be > 0");
  const RealVector lambda = RealVector::Constant(a.cols(), lambda_scalar);
  const RealVector pfa_vec = RealVector::Constant(a.cols(), pfa);
  return dwld_pipeline(y, a, lambda, pfa_vec, sigma2, opts);
}

}  // namespace dwld

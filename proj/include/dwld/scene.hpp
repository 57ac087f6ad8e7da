#pragma once

#include <cmath>
#include <initializer_list>
#include <utility>

#include "dwld/design.hpp"
#include "dwld/rng.hpp"
#include "dwld/types.hpp"

namespace dwld {

/// Complex AWGN variance. sigma2 = 0 is allowed for noise-free synthesis;
/// operations that divide by it validate separately.
struct NoiseSpec {
  double sigma2 = 0.01;
};

struct SceneConfig {
  Index n = 512;
  Index m = 256;
  double sigma_x2 = 1.0;  // variance of nonzero amplitudes
  NoiseSpec noise;
  RealVector prior;  // per-entry nonzero probabilities, length n
  MatrixKind matrix_kind = MatrixKind::PartialFourier;
  std::uint64_t master_seed = 0;

  double gamma() const { return static_cast<double>(m) / static_cast<double>(n); }
};

inline void validate(const SceneConfig& cfg) {
  if (cfg.n < 1 || cfg.m < 1) throw InvalidParameterError("scene: dimensions must be positive");
  if (cfg.m > cfg.n) throw InvalidParameterError("scene: requires M <= N");
  if (!(cfg.sigma_x2 > 0.0)) throw InvalidParameterError("scene: sigma_x2 must be positive");
  if (!(cfg.noise.sigma2 >= 0.0)) throw InvalidParameterError("scene: sigma2 must be >= 0");
  if (cfg.prior.size() != cfg.n) throw DimensionError("scene: prior length != N");
  for (Index i = 0; i < cfg.prior.size(); ++i)
    if (!(cfg.prior[i] >= 0.0 && cfg.prior[i] <= 1.0))
      throw InvalidParameterError("scene: prior entries must lie in [0,1]");
}

struct SparseScene {
  ComplexVector x0;
  IndexSet support;  // indices of nonzero entries of x0
  ComplexVector y;
};

/// Piecewise-constant prior: blocks of (probability, count) concatenated.
inline RealVector block_prior(Index n, std::initializer_list<std::pair<double, Index>> blocks) {
  RealVector p(n);
  Index at = 0;
  for (const auto& [value, count] : blocks) {
    if (at + count > n) throw DimensionError("block_prior: block counts exceed N");
    p.segment(at, count).setConstant(value);
    at += count;
  }
  if (at != n) throw DimensionError("block_prior: block counts do not sum to N");
  return p;
}

/// Bernoulli-Gaussian draw: entry i is 0 with probability 1 - p_i, else
/// CN(0, sigma_x2). The returned support lists the nonzero indices exactly.
inline std::pair<ComplexVector, IndexSet> gen_sparse_signal(const RealVector& prior,
                                                            double sigma_x2, Rng& rng) {
  if (!(sigma_x2 > 0.0)) throw InvalidParameterError("gen_sparse_signal: sigma_x2 must be > 0");
  const Index n = prior.size();
  ComplexVector x = ComplexVector::Zero(n);
  IndexSet support;
  for (Index i = 0; i < n; ++i) {
    const double p = prior[i];
    if (!(p >= 0.0 && p <= 1.0))
      throw InvalidParameterError("gen_sparse_signal: prior entries must lie in [0,1]");
    if (uniform01(rng) < p) {
      x[i] = complex_normal(rng, sigma_x2);
      support.push_back(i);
    }
  }
  return {std::move(x), std::move(support)};
}

/// y = A x0 + xi with xi_i i.i.d. CN(0, sigma2).
inline ComplexVector measure(const DesignMatrix& a, const ComplexVector& x0,
                             const NoiseSpec& noise, Rng& rng) {
  if (x0.size() != a.cols()) throw DimensionError("measure: x0 length != N");
  if (!(noise.sigma2 >= 0.0)) throw InvalidParameterError("measure: sigma2 must be >= 0");
  ComplexVector y = apply(a, x0);
  if (noise.sigma2 > 0.0)
    for (Index i = 0; i < y.size(); ++i) y[i] += complex_normal(rng, noise.sigma2);
  return y;
}

/// Matched-filter SNR: gamma * sigma_x2 / sigma2.
inline double snr(double gamma, double sigma_x2, double sigma2) {
  if (!(gamma > 0.0) || !(sigma_x2 > 0.0)) throw InvalidParameterError("snr: inputs must be positive");
  if (!(sigma2 > 0.0)) throw InvalidParameterError("snr: sigma2 must be positive");
  return gamma * sigma_x2 / sigma2;
}

inline double snr_to_db(double snr_linear) { return 10.0 * std::log10(snr_linear); }

inline double snr_from_db(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

/// Inverts the MF SNR identity for the amplitude variance.
inline double sigma_x2_for_snr_db(double snr_db, double gamma, double sigma2) {
  if (!(gamma > 0.0) || !(sigma2 > 0.0))
    throw InvalidParameterError("sigma_x2_for_snr_db: gamma and sigma2 must be positive");
  return snr_from_db(snr_db) * sigma2 / gamma;
}

/// Draws the design matrix for a scene configuration.
inline DesignMatrix gen_design(const SceneConfig& cfg, Rng& rng, bool materialize = true) {
  switch (cfg.matrix_kind) {
    case MatrixKind::PartialFourier: return gen_partial_fourier(cfg.n, cfg.m, rng, materialize);
    case MatrixKind::HaarRowOrthogonal: return gen_haar_row_orthogonal(cfg.n, cfg.m, rng);
    case MatrixKind::GaussianIID: return gen_gaussian_iid(cfg.n, cfg.m, rng);
  }
  throw InvalidParameterError("gen_design: unknown matrix kind");
}

}  // namespace dwld

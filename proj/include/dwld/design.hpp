#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "dwld/rng.hpp"
#include "dwld/types.hpp"

namespace dwld {

/// M x N measurement matrix tagged with the ensemble it was drawn from.
///
/// For the partial-Fourier ensemble the selected DFT rows are recorded and
/// products go through an FFT, so `entries` may be left empty on hot paths.
struct DesignMatrix {
  MatrixKind kind = MatrixKind::GaussianIID;
  Index m = 0;
  Index n = 0;
  ComplexMatrix entries;        // dense coefficients; optional for PartialFourier
  Eigen::VectorXi fourier_rows; // selected DFT row indices (PartialFourier only)

  Index rows() const { return m; }
  Index cols() const { return n; }
  double gamma() const { return static_cast<double>(m) / static_cast<double>(n); }
  bool row_orthogonal_kind() const { return kind != MatrixKind::GaussianIID; }
  bool has_fft_path() const { return fourier_rows.size() == m && m > 0; }
};

namespace detail {

inline Eigen::FFT<double>& thread_fft() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

inline void check_dims(Index n, Index m) {
  if (m < 1 || n < 1) throw DimensionError("design matrix dimensions must be positive");
  if (m > n) throw DimensionError("design matrix requires M <= N");
}

}  // namespace detail

/// y = A x.
inline ComplexVector apply(const DesignMatrix& a, const ComplexVector& x) {
  if (x.size() != a.n) throw DimensionError("apply: x has wrong length");
  if (a.has_fft_path()) {
    ComplexVector spectrum;
    detail::thread_fft().fwd(spectrum, x);
    const double scale = 1.0 / std::sqrt(static_cast<double>(a.n));
    ComplexVector y(a.m);
    for (Index k = 0; k < a.m; ++k) y[k] = spectrum[a.fourier_rows[k]] * scale;
    return y;
  }
  return a.entries * x;
}

/// x = A^H r.
inline ComplexVector apply_adjoint(const DesignMatrix& a, const ComplexVector& r) {
  if (r.size() != a.m) throw DimensionError("apply_adjoint: r has wrong length");
  if (a.has_fft_path()) {
    ComplexVector padded = ComplexVector::Zero(a.n);
    for (Index k = 0; k < a.m; ++k) padded[a.fourier_rows[k]] = r[k];
    ComplexVector out;
    detail::thread_fft().inv(out, padded);  // scaled by 1/N
    out *= std::sqrt(static_cast<double>(a.n));
    return out;
  }
  return a.entries.adjoint() * r;
}

/// Dense coefficients, materializing the partial-Fourier rows if needed.
inline ComplexMatrix dense(const DesignMatrix& a) {
  if (a.entries.rows() == a.m && a.entries.cols() == a.n && a.m > 0) return a.entries;
  if (!a.has_fft_path()) throw InvalidParameterError("dense: design matrix has no entries");
  ComplexMatrix out(a.m, a.n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(a.n));
  const double base = -2.0 * M_PI / static_cast<double>(a.n);
  for (Index k = 0; k < a.m; ++k) {
    const double row_phase = base * static_cast<double>(a.fourier_rows[k]);
    for (Index j = 0; j < a.n; ++j) {
      const double phi = row_phase * static_cast<double>(j);
      out(k, j) = Complex(std::cos(phi), std::sin(phi)) * scale;
    }
  }
  return out;
}

/// max |A A^H - I| over entries.
inline double row_orthogonality_error(const DesignMatrix& a) {
  const ComplexMatrix d = dense(a);
  ComplexMatrix gram = d * d.adjoint();
  gram.diagonal().array() -= 1.0;
  return gram.cwiseAbs().maxCoeff();
}

/// M distinct rows of the N-point unitary DFT, drawn without replacement.
/// `materialize` controls whether dense entries are filled in addition to the
/// row record.
inline DesignMatrix gen_partial_fourier(Index n, Index m, Rng& rng, bool materialize = true) {
  detail::check_dims(n, m);
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  // Partial Fisher-Yates: first m slots end up a uniform ordered sample.
  for (Index k = 0; k < m; ++k) {
    std::uniform_int_distribution<Index> pick(k, n - 1);
    std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  DesignMatrix a;
  a.kind = MatrixKind::PartialFourier;
  a.m = m;
  a.n = n;
  a.fourier_rows = Eigen::Map<Eigen::VectorXi>(pool.data(), m);
  if (materialize) a.entries = dense(a);
  return a;
}

/// M orthonormal rows of a Haar-distributed N x N unitary matrix: QR of an
/// i.i.d. complex Gaussian matrix with the diagonal phase correction.
inline DesignMatrix gen_haar_row_orthogonal(Index n, Index m, Rng& rng) {
  detail::check_dims(n, m);
  ComplexMatrix g(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) g(i, j) = complex_normal(rng, 1.0);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, m);
  const auto r_diag = qr.matrixQR().diagonal().head(m);
  ComplexVector phase(m);
  for (Index j = 0; j < m; ++j) {
    const double mag = std::abs(r_diag[j]);
    phase[j] = mag > 0.0 ? r_diag[j] / mag : Complex(1.0, 0.0);
  }
  DesignMatrix a;
  a.kind = MatrixKind::HaarRowOrthogonal;
  a.m = m;
  a.n = n;
  a.entries = (q * phase.asDiagonal()).adjoint();
  return a;
}

/// Entries i.i.d. CN(0, 1/N), so the expected row squared-norm is 1.
inline DesignMatrix gen_gaussian_iid(Index n, Index m, Rng& rng) {
  detail::check_dims(n, m);
  DesignMatrix a;
  a.kind = MatrixKind::GaussianIID;
  a.m = m;
  a.n = n;
  a.entries.resize(m, n);
  const double variance = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a.entries(i, j) = complex_normal(rng, variance);
  return a;
}

/// Wraps a dense matrix (e.g. loaded from a file) as a DesignMatrix.
inline DesignMatrix design_from_dense(ComplexMatrix entries, MatrixKind kind) {
  detail::check_dims(entries.cols(), entries.rows());
  DesignMatrix a;
  a.kind = kind;
  a.m = entries.rows();
  a.n = entries.cols();
  a.entries = std::move(entries);
  return a;
}

/// Largest eigenvalue of A^H A. Exactly 1 for row-orthogonal ensembles;
/// power iteration (with a small safety factor) otherwise.
inline double lipschitz_constant(const DesignMatrix& a) {
  if (a.row_orthogonal_kind()) return 1.0;
  Rng rng(0x9e3779b97f4a7c15ULL);  // internal fixed seed; result is deterministic
  ComplexVector v(a.n);
  for (Index j = 0; j < a.n; ++j) v[j] = complex_normal(rng, 1.0);
  v.normalize();
  double value = 0.0;
  for (int it = 0; it < 200; ++it) {
    ComplexVector w = apply_adjoint(a, apply(a, v));
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    w /= norm;
    const double prev = value;
    value = norm;  // Rayleigh quotient of the normalized iterate
    v = std::move(w);
    if (it > 4 && std::abs(value - prev) <= 1e-12 * value) break;
  }
  return value * (1.0 + 1e-6);
}

}  // namespace dwld

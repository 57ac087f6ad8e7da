#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dwld {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexSet = std::vector<Index>;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Ensemble the measurement matrix was drawn from.
enum class MatrixKind { PartialFourier, HaarRowOrthogonal, GaussianIID };

inline const char* to_string(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::PartialFourier: return "partial_fourier";
    case MatrixKind::HaarRowOrthogonal: return "haar";
    case MatrixKind::GaussianIID: return "gaussian";
  }
  return "unknown";
}

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solver ran out of iterations; carries the last optimality certificate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double kkt_residual, int iterations)
      : std::runtime_error(what), kkt_residual_(kkt_residual), iterations_(iterations) {}

  double kkt_residual() const { return kkt_residual_; }
  int iterations() const { return iterations_; }

 private:
  double kkt_residual_;
  int iterations_;
};

/// The estimate is too dense for the compression rate (rho >= gamma):
/// no positive debiasing coefficient exists.
class DebiasInfeasibleError : public std::runtime_error {
 public:
  DebiasInfeasibleError(double rho, double gamma)
      : std::runtime_error("debias infeasible: active density rho = " + std::to_string(rho) +
                           " >= compression rate gamma = " + std::to_string(gamma)),
        rho_(rho),
        gamma_(gamma) {}

  double rho() const { return rho_; }
  double gamma() const { return gamma_; }

 private:
  double rho_;
  double gamma_;
};

struct ObjectiveUndefinedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dwld

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qbnf/error.hpp"
#include "qbnf/quantize.hpp"

namespace qbnf {

struct Spectrum {
  std::vector<Complex> eigenvalues;
  /// ||M v - lambda v|| / ||v|| for the computed eigenvector; bounds sigma_min(M - lambda).
  std::vector<double> residuals;
  /// Frobenius norm of the matrix.
  double norm = 0.0;
  std::uint64_t matrix_fingerprint = 0;
};

/// Raised when QR iteration exhausts its cap; carries the blocks finished so far.
class EigenConvergenceError : public ConvergenceError {
 public:
  EigenConvergenceError(const std::string& what, Spectrum partial)
      : ConvergenceError(what), partial_(std::move(partial)) {}
  const Spectrum& partial() const { return partial_; }

 private:
  Spectrum partial_;
};

struct EigenOptions {
  /// QR sweeps per block are capped at iteration_factor * n.
  int iteration_factor = 40;
  bool balance = true;
};

/// All n eigenvalues with residual certificates.  The matrix is first split into the
/// irreducible blocks of its sparsity graph; each block is balanced and solved by
/// Hessenberg reduction and shifted QR.
Spectrum eigenvalues(const Eigen::MatrixXcd& M, const EigenOptions& opts = {});
Spectrum eigenvalues(const OperatorMatrix& M, const EigenOptions& opts = {});

/// Parlett-Reinsch balancing with radix 2: returns D with D^{-1} M D balanced.
Eigen::VectorXd balance_scaling(const Eigen::MatrixXcd& M);

}  // namespace qbnf

#pragma once

#include <stdexcept>

#include "tecromac/tensor.hpp"

namespace tecromac {

class SvdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thin SVD: X = left * diag(values) * right^T with min(rows, cols) triplets,
/// values sorted in decreasing order.
struct EconomySvd {
  Matrix left;
  Vector values;
  Matrix right;

  Matrix reconstruct() const { return left * values.asDiagonal() * right.transpose(); }
};

/// Aspect ratio at or above which the Gram-matrix route is used.
inline constexpr double kGramAspectRatio = 4.0;

/// Thin SVD of a finite matrix. Tall-skinny inputs (rows >= 4 * cols) go
/// through an eigendecomposition of the cols x cols Gram matrix; wide inputs
/// are handled by transposition, everything else by a divide-and-conquer
/// bidiagonal SVD. Throws SvdError on non-finite input or failed convergence.
EconomySvd economy_svd(const Eigen::Ref<const Matrix> &x);

/// Largest singular value estimated by power iteration on X^T X.
double spectral_norm_estimate(const Eigen::Ref<const Matrix> &x, int iterations = 50, double tol = 1e-10);

}  // namespace tecromac

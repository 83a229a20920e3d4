#pragma once

#include "tecromac/tensor.hpp"

namespace tecromac {

/// Elementwise soft-thresholding sign(x) * max(|x| - lambda, 0); the
/// proximal operator of lambda * ||.||_1. Throws on negative lambda.
Matrix soft_threshold(const Eigen::Ref<const Matrix> &x, double lambda);
double soft_threshold(double x, double lambda);

/// Singular value thresholding U * S_eta(Sigma) * V^T; the proximal operator
/// of eta * ||.||_*.
Matrix svt(const Eigen::Ref<const Matrix> &x, double eta);

/// SVT output together with the rank and nuclear norm of the result.
struct SvtResult {
  Matrix value;
  Index rank = 0;
  double nuclear = 0.0;
};
SvtResult svt_detailed(const Eigen::Ref<const Matrix> &x, double eta);

/// Sum of singular values.
double nuclear_norm(const Eigen::Ref<const Matrix> &x);

}  // namespace tecromac

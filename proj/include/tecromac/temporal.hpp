#pragma once

#include "tecromac/tensor.hpp"

namespace tecromac {

/// First-difference operator in time, applied independently to each channel
/// block of a matrix in the DataMatrix column layout.
///
/// The difference at frame 0 is defined as zero, so a block of t frames
/// contributes exactly t-1 nonzero difference columns. The associated Gram
/// operator is the path-graph Laplacian per channel (spectral norm < 4).
/// Nothing here is ever materialized as a dense (c*t) x (c*t) matrix.
class TemporalOperator {
 public:
  TemporalOperator(Index channels, Index frames);

  Index channels() const { return c_; }
  Index frames() const { return t_; }

  /// D(X): column (k, l) holds X(:, (k, l)) - X(:, (k, l-1)) for l >= 1, zero for l = 0.
  Matrix diff(const Eigen::Ref<const Matrix> &x) const;

  /// ||D(X)||_F^2 without forming D(X).
  double squared_norm(const Eigen::Ref<const Matrix> &x) const;

  /// X * L where L is the per-channel path Laplacian acting on columns;
  /// the gradient of 0.5 * ||D(X)||_F^2.
  Matrix gram(const Eigen::Ref<const Matrix> &x) const;

  /// L * V for a matrix whose rows follow the (k, l) column layout.
  Matrix gram_rows(const Eigen::Ref<const Matrix> &v) const;

  /// Upper bound on the spectral norm of L.
  static constexpr double kGramNormBound = 4.0;

 private:
  void check_columns(Index cols) const;

  Index c_;
  Index t_;
};

Matrix temporal_diff(const DataMatrix &x);
DataMatrix temporal_laplacian(const DataMatrix &x);

}  // namespace tecromac

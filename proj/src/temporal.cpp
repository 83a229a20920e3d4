#include "tecromac/temporal.hpp"

#include <string>

namespace tecromac {

TemporalOperator::TemporalOperator(Index channels, Index frames) : c_(channels), t_(frames) {
  if (channels <= 0 || frames <= 0) throw DimensionError("temporal operator needs c > 0 and t > 0");
}

void TemporalOperator::check_columns(Index cols) const {
  if (cols != c_ * t_)
    throw DimensionError("temporal operator expects " + std::to_string(c_ * t_) + " columns, got " +
                         std::to_string(cols));
}

Matrix TemporalOperator::diff(const Eigen::Ref<const Matrix> &x) const {
  check_columns(x.cols());
  Matrix out(x.rows(), x.cols());
  for (Index k = 0; k < c_; ++k) {
    const Index base = k * t_;
    out.col(base).setZero();
    for (Index l = 1; l < t_; ++l) out.col(base + l) = x.col(base + l) - x.col(base + l - 1);
  }
  return out;
}

double TemporalOperator::squared_norm(const Eigen::Ref<const Matrix> &x) const {
  check_columns(x.cols());
  double total = 0.0;
  for (Index k = 0; k < c_; ++k) {
    const Index base = k * t_;
    for (Index l = 1; l < t_; ++l) total += (x.col(base + l) - x.col(base + l - 1)).squaredNorm();
  }
  return total;
}

Matrix TemporalOperator::gram(const Eigen::Ref<const Matrix> &x) const {
  check_columns(x.cols());
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Index k = 0; k < c_; ++k) {
    const Index base = k * t_;
    for (Index l = 1; l < t_; ++l) {
      // d = x_l - x_{l-1} contributes +d to frame l and -d to frame l-1.
      auto d = x.col(base + l) - x.col(base + l - 1);
      out.col(base + l) += d;
      out.col(base + l - 1) -= d;
    }
  }
  return out;
}

Matrix TemporalOperator::gram_rows(const Eigen::Ref<const Matrix> &v) const {
  if (v.rows() != c_ * t_)
    throw DimensionError("temporal operator expects " + std::to_string(c_ * t_) + " rows, got " +
                         std::to_string(v.rows()));
  Matrix out = Matrix::Zero(v.rows(), v.cols());
  for (Index k = 0; k < c_; ++k) {
    const Index base = k * t_;
    for (Index l = 1; l < t_; ++l) {
      auto d = v.row(base + l) - v.row(base + l - 1);
      out.row(base + l) += d;
      out.row(base + l - 1) -= d;
    }
  }
  return out;
}

Matrix temporal_diff(const DataMatrix &x) {
  return TemporalOperator(x.dims.c, x.dims.t).diff(x.values);
}

DataMatrix temporal_laplacian(const DataMatrix &x) {
  return DataMatrix(TemporalOperator(x.dims.c, x.dims.t).gram(x.values), x.dims);
}

}  // namespace tecromac

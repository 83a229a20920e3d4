#include "tecromac/shrinkage.hpp"

#include <cmath>
#include <stdexcept>

#include "tecromac/svd.hpp"

namespace tecromac {

double soft_threshold(double x, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("soft_threshold: lambda must be nonnegative");
  const double mag = std::abs(x) - lambda;
  return mag > 0.0 ? std::copysign(mag, x) : 0.0;
}

Matrix soft_threshold(const Eigen::Ref<const Matrix> &x, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("soft_threshold: lambda must be nonnegative");
  return x.unaryExpr([lambda](double v) {
    const double mag = std::abs(v) - lambda;
    return mag > 0.0 ? std::copysign(mag, v) : 0.0;
  });
}

SvtResult svt_detailed(const Eigen::Ref<const Matrix> &x, double eta) {
  if (!(eta >= 0.0)) throw std::invalid_argument("svt: eta must be nonnegative");
  const EconomySvd svd = economy_svd(x);
  SvtResult out;
  while (out.rank < svd.values.size() && svd.values(out.rank) > eta) ++out.rank;
  if (out.rank == 0) {
    out.value = Matrix::Zero(x.rows(), x.cols());
    return out;
  }
  const Vector shrunk = svd.values.head(out.rank).array() - eta;
  out.nuclear = shrunk.sum();
  out.value = svd.left.leftCols(out.rank) * shrunk.asDiagonal() * svd.right.leftCols(out.rank).transpose();
  return out;
}

Matrix svt(const Eigen::Ref<const Matrix> &x, double eta) { return svt_detailed(x, eta).value; }

double nuclear_norm(const Eigen::Ref<const Matrix> &x) {
  if (x.size() == 0) return 0.0;
  return economy_svd(x).values.sum();
}

}  // namespace tecromac

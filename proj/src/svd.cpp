#include "tecromac/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace tecromac {

namespace {

// Tall-skinny route: eigendecomposition of the Gram matrix X^T X gives the
// right singular vectors; singular values and left vectors follow from X V.
EconomySvd gram_svd(const Eigen::Ref<const Matrix> &x) {
  const Index k = x.cols();
  Matrix gram = Matrix::Zero(k, k);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram.selfadjointView<Eigen::Lower>());
  if (eig.info() != Eigen::Success) throw SvdError("Gram eigendecomposition did not converge");

  const Matrix w = x * eig.eigenvectors();
  Vector norms = w.colwise().norm().transpose();
  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return norms(a) > norms(b); });

  EconomySvd out;
  out.left.resize(x.rows(), k);
  out.values.resize(k);
  out.right.resize(k, k);
  for (Index p = 0; p < k; ++p) {
    const Index q = order[static_cast<std::size_t>(p)];
    const double s = norms(q);
    out.values(p) = s;
    out.right.col(p) = eig.eigenvectors().col(q);
    if (s > 0.0)
      out.left.col(p) = w.col(q) / s;
    else
      out.left.col(p).setZero();
  }
  return out;
}

EconomySvd bidiagonal_svd(const Eigen::Ref<const Matrix> &x) {
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw SvdError("bidiagonal SVD did not converge");
  return EconomySvd{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace

EconomySvd economy_svd(const Eigen::Ref<const Matrix> &x) {
  if (x.size() == 0) return EconomySvd{Matrix(x.rows(), 0), Vector(0), Matrix(x.cols(), 0)};
  if (!x.allFinite()) throw SvdError("economy_svd: input contains non-finite values");

  const double rows = static_cast<double>(x.rows());
  const double cols = static_cast<double>(x.cols());
  if (rows >= kGramAspectRatio * cols) return gram_svd(x);
  if (cols >= kGramAspectRatio * rows) {
    EconomySvd t = gram_svd(x.transpose());
    std::swap(t.left, t.right);
    return t;
  }
  return bidiagonal_svd(x);
}

double spectral_norm_estimate(const Eigen::Ref<const Matrix> &x, int iterations, double tol) {
  if (x.size() == 0) return 0.0;
  Vector v = Vector::Ones(x.cols()) / std::sqrt(static_cast<double>(x.cols()));
  double sigma = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Vector u = x * v;
    // Rayleigh quotient of X^T X at the current unit vector.
    const double estimate = u.norm();
    Vector next = x.transpose() * u;
    const double norm = next.norm();
    if (norm == 0.0) {
      // Start vector fell in the null space; fall back to a direct estimate.
      return economy_svd(x).values(0);
    }
    const bool done = std::abs(estimate - sigma) <= tol * estimate;
    sigma = estimate;
    v = next / norm;
    if (done) break;
  }
  return sigma;
}

}  // namespace tecromac

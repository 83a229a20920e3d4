#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "tecromac/shrinkage.hpp"
#include "tecromac/svd.hpp"

using namespace tecromac;

namespace {

Matrix gaussian(Index rows, Index cols, std::mt19937_64 &rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = n(rng);
  return m;
}

double l1_prox_objective(const Matrix &e, const Matrix &x, double lambda) {
  return lambda * e.cwiseAbs().sum() + 0.5 * (e - x).squaredNorm();
}

// Nuclear norm through the eigenvalues of X^T X, independent of economy_svd.
double nuclear_oracle(const Matrix &x) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(x.transpose() * x);
  return eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

double nuclear_prox_objective(const Matrix &z, const Matrix &x, double eta) {
  return eta * nuclear_oracle(z) + 0.5 * (z - x).squaredNorm();
}

}  // namespace

TEST_CASE("soft_threshold arithmetic") {
  CHECK(soft_threshold(1.2, 0.5) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(soft_threshold(-0.3, 0.5) == 0.0);
  CHECK(soft_threshold(-1.5, 0.5) == -1.0);
  std::mt19937_64 rng(1);
  const Matrix x = gaussian(5, 4, rng);
  CHECK(soft_threshold(x, 0.0) == x);
  CHECK_THROWS_AS(soft_threshold(x, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(soft_threshold(1.0, -0.1), std::invalid_argument);
}

TEST_CASE("soft_threshold beats random perturbations on its prox objective") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 0.1);
  const double lambda = 0.3;
  const Matrix x = gaussian(8, 6, rng);
  const Matrix e = soft_threshold(x, lambda);
  const double best = l1_prox_objective(e, x, lambda);
  for (int trial = 0; trial < 1000; ++trial) {
    Matrix perturbed = e;
    for (Index i = 0; i < perturbed.size(); ++i) perturbed(i) += n(rng);
    CHECK(best <= l1_prox_objective(perturbed, x, lambda));
  }
}

TEST_CASE("svt simple cases") {
  CHECK(svt(Matrix::Zero(4, 3), 0.5).norm() == 0.0);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  const Matrix out = svt(d, 2.0);
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  CHECK((out - expected).norm() <= 1e-14);
  CHECK_THROWS_AS(svt(d, -1.0), std::invalid_argument);
}

TEST_CASE("svt singular values are soft-thresholded input singular values") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = gaussian(8, 6, rng);
    const double eta = 0.8;
    Eigen::JacobiSVD<Matrix> ref(x);
    Eigen::JacobiSVD<Matrix> got(svt(x, eta));
    const Vector expected = (ref.singularValues().array() - eta).cwiseMax(0.0);
    CHECK((got.singularValues() - expected).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("svt beats random nearby matrices on its prox objective") {
  std::mt19937_64 rng(4);
  const double eta = 0.3;
  const Matrix x = gaussian(6, 4, rng);
  const Matrix z = svt(x, eta);
  const double best = nuclear_prox_objective(z, x, eta);
  for (int trial = 0; trial < 1000; ++trial)
    CHECK(best <= nuclear_prox_objective(z + gaussian(6, 4, rng, 0.05), x, eta) + 1e-12);
}

TEST_CASE("prox operators are nonexpansive") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = gaussian(7, 5, rng);
    const Matrix b = gaussian(7, 5, rng);
    const double gap = (a - b).norm();
    CHECK((soft_threshold(a, 0.4) - soft_threshold(b, 0.4)).norm() <= gap + 1e-12);
    CHECK((svt(a, 0.4) - svt(b, 0.4)).norm() <= gap + 1e-12);
  }
}

TEST_CASE("economy_svd") {
  SUBCASE("identity") {
    const EconomySvd s = economy_svd(Matrix::Identity(3, 3));
    CHECK((s.values - Vector::Ones(3)).norm() <= 1e-14);
  }
  SUBCASE("rank one outer product") {
    std::mt19937_64 rng(6);
    const Matrix u = gaussian(40, 1, rng);
    const Matrix v = gaussian(7, 1, rng);
    const EconomySvd s = economy_svd(u * v.transpose());
    CHECK(s.values.size() == 7);
    CHECK(s.values(0) == doctest::Approx(u.norm() * v.norm()).epsilon(1e-12));
    CHECK(s.values.tail(6).maxCoeff() <= 1e-12 * s.values(0));
  }
  SUBCASE("tall random matrix reconstructs through the Gram route") {
    std::mt19937_64 rng(7);
    const Matrix x = gaussian(500, 20, rng);
    const EconomySvd s = economy_svd(x);
    CHECK(s.left.cols() == 20);
    CHECK((x - s.reconstruct()).norm() <= 1e-10 * x.norm());
    CHECK((s.right.transpose() * s.right - Matrix::Identity(20, 20)).norm() <= 1e-12);
    CHECK((s.left.transpose() * s.left - Matrix::Identity(20, 20)).norm() <= 1e-10);
    Eigen::JacobiSVD<Matrix> ref(x);
    CHECK((ref.singularValues() - s.values).norm() <= 1e-10 * s.values(0));
  }
  SUBCASE("wide random matrix") {
    std::mt19937_64 rng(8);
    const Matrix x = gaussian(10, 90, rng);
    const EconomySvd s = economy_svd(x);
    CHECK(s.values.size() == 10);
    CHECK((x - s.reconstruct()).norm() <= 1e-10 * x.norm());
  }
  SUBCASE("square-ish random matrix") {
    std::mt19937_64 rng(9);
    const Matrix x = gaussian(30, 20, rng);
    CHECK((x - economy_svd(x).reconstruct()).norm() <= 1e-12 * x.norm());
  }
  SUBCASE("non-finite input is reported") {
    Matrix x = Matrix::Ones(6, 2);
    x(3, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(economy_svd(x), SvdError);
  }
}

TEST_CASE("nuclear_norm") {
  CHECK(nuclear_norm(Matrix::Zero(3, 3)) == 0.0);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  CHECK(nuclear_norm(d) == doctest::Approx(4.0).epsilon(1e-14));
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = gaussian(12, 5, rng);
    CHECK(nuclear_norm(x) == doctest::Approx(nuclear_oracle(x)).epsilon(1e-10));
  }
}

TEST_CASE("spectral norm estimate") {
  std::mt19937_64 rng(11);
  const Matrix x = gaussian(60, 8, rng);
  Eigen::JacobiSVD<Matrix> ref(x);
  const double sigma = ref.singularValues()(0);
  const double estimate = spectral_norm_estimate(x, 500, 1e-14);
  // A Rayleigh quotient never overshoots the top singular value.
  CHECK(estimate <= sigma * (1.0 + 1e-12));
  CHECK(estimate >= 0.999 * sigma);
  Matrix separated = Matrix::Zero(30, 4);
  separated.diagonal() << 5.0, 2.0, 1.0, 0.5;
  CHECK(spectral_norm_estimate(separated) == doctest::Approx(5.0).epsilon(1e-10));
}

#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tecromac/temporal.hpp"
#include "tecromac/tensor.hpp"

namespace tecromac {

/// Regularization weights used for the reference experiments.
inline constexpr double kDefaultLambda1 = 20.0;
inline constexpr double kDefaultLambda2 = 0.5;

enum class Loss { absolute, squared };
enum class Algorithm { ipg, alt };

std::string to_string(Loss loss);
std::string to_string(Algorithm algorithm);
Loss parse_loss(const std::string &s);
Algorithm parse_algorithm(const std::string &s);

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  double lambda1 = kDefaultLambda1;
  double lambda2 = kDefaultLambda2;
  Loss loss = Loss::absolute;
  Algorithm algorithm = Algorithm::ipg;
  /// Initial penalty; unset means 1.25 / sigma_max(Y).
  std::optional<double> mu0;
  double rho = 1.1;
  /// The penalty is capped at mu_max_factor * mu0.
  double mu_max_factor = 1e7;
  double primal_tol = 1e-7;
  int max_outer = 500;
  /// ALT inner loop: stop once the relative change of X drops below
  /// inner_tol or after max_inner alternating passes. One pass per outer
  /// iteration mirrors the single proximal step of the ipg algorithm.
  double inner_tol = 1e-4;
  int max_inner = 1;
  /// Factor rank (ALT only).
  Index rank = 20;
  /// Fixed ALT gradient step; unset selects an exact line search per block.
  std::optional<double> step_eta;
  std::uint64_t seed = 0;

  void validate(Index rows, Index cols) const;
};

/// Data, observed set and temporal structure of one reconstruction problem.
struct Problem {
  /// Observations, zero-filled outside the observed set.
  Matrix data;
  /// 0/1 entries, 1 on the observed set.
  Matrix observed;
  TemporalOperator temporal;

  Problem(Matrix y, Matrix mask, Index channels, Index frames);
  static Problem from(const DataMatrix &y, const ObservationMask &mask);

  Index rows() const { return data.rows(); }
  Index cols() const { return data.cols(); }
};

/// Data-fidelity term on the observed set: ||P(E)||_1 or 0.5 ||P(E)||_F^2.
double data_loss(const Problem &p, const Eigen::Ref<const Matrix> &e, Loss loss);

/// ||P(Y - X)||_1 + lambda1 ||X||_* + lambda2/2 ||D(X)||_F^2.
double tecromac_objective(const Problem &p, const Eigen::Ref<const Matrix> &x, double lambda1, double lambda2,
                          Loss loss = Loss::absolute);

double augmented_lagrangian(const Problem &p, const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &e,
                            const Eigen::Ref<const Matrix> &z, double mu, double lambda1, double lambda2,
                            Loss loss = Loss::absolute);

/// Smooth part of the X-subproblem:
/// lambda2/2 ||D(X)||^2 + <Z, Y - X - E> + mu/2 ||Y - X - E||^2.
double smooth_part(const Problem &p, const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &e,
                   const Eigen::Ref<const Matrix> &z, double mu, double lambda2);

/// Gradient of smooth_part with respect to X.
Matrix grad_f(const Problem &p, const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &e,
              const Eigen::Ref<const Matrix> &z, double mu, double lambda2);

/// Majorization constant 1.01 * (4 lambda2 + mu).
double ipg_step_constant(double mu, double lambda2);

/// One proximal gradient step SVT_{lambda1/c}(X - grad_f / c). Requires
/// c > 4 lambda2 + mu so that the quadratic majorizer is valid.
Matrix ipg_update_x(const Problem &p, const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &e,
                    const Eigen::Ref<const Matrix> &z, double mu, double c_step, double lambda1, double lambda2);

/// Closed-form minimizer of the E-subproblem. Off the observed set the
/// constraint residual is absorbed exactly.
Matrix update_e(const Problem &p, const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &z, double mu,
                Loss loss);

/// Z + mu (Y - X - E).
Matrix update_dual(const Eigen::Ref<const Matrix> &z, double mu, const Eigen::Ref<const Matrix> &y,
                   const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &e);

/// min(rho * mu, mu_max).
double update_mu(double mu, double rho, double mu_max = std::numeric_limits<double>::infinity());

/// ||Y - X - E||_F / ||Y||_F.
double primal_residual(const Problem &p, const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &e);
bool check_convergence(const Problem &p, const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &e,
                       double tol);

/// Factored augmented Lagrangian with lambda1/2 (||U||^2 + ||V||^2) standing
/// in for the nuclear norm of X = U V^T.
double factored_lagrangian(const Problem &p, const Eigen::Ref<const Matrix> &u, const Eigen::Ref<const Matrix> &v,
                           const Eigen::Ref<const Matrix> &e, const Eigen::Ref<const Matrix> &z, double mu,
                           double lambda1, double lambda2, Loss loss = Loss::absolute);

Matrix grad_u(const Problem &p, const Eigen::Ref<const Matrix> &u, const Eigen::Ref<const Matrix> &v,
              const Eigen::Ref<const Matrix> &e, const Eigen::Ref<const Matrix> &z, double mu, double lambda1,
              double lambda2);
Matrix grad_v(const Problem &p, const Eigen::Ref<const Matrix> &u, const Eigen::Ref<const Matrix> &v,
              const Eigen::Ref<const Matrix> &e, const Eigen::Ref<const Matrix> &z, double mu, double lambda1,
              double lambda2);

struct TraceRow {
  int iteration = 0;
  double objective = 0.0;
  double residual = 0.0;
  double mu = 0.0;
  double seconds = 0.0;
};

/// Tab-separated table with a header line: iteration, objective, residual, mu, seconds.
void write_trace(std::ostream &os, const std::vector<TraceRow> &trace);

struct SolverState {
  Matrix x;
  Matrix e;
  Matrix z;
  double mu = 0.0;
  int iter = 0;
  std::vector<TraceRow> trace;
};

struct Diagnostics {
  double objective = 0.0;
  double residual = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  Index rank = 0;
  bool converged = false;
  std::vector<TraceRow> trace;
};

struct Solution {
  Matrix x;
  Diagnostics diagnostics;
};

/// Initial multiplier, penalty and penalty cap for a problem.
SolverState initial_state(const Problem &p, const SolverConfig &cfg, double &mu_max);

Solution solve_ipg(const Problem &p, const SolverConfig &cfg);
Solution solve_alt(const Problem &p, const SolverConfig &cfg);

/// Dispatch on cfg.algorithm.
Solution solve(const Problem &p, const SolverConfig &cfg);

}  // namespace tecromac

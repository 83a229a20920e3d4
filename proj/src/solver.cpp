#include "tecromac/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include <Eigen/Cholesky>

#include "tecromac/shrinkage.hpp"
#include "tecromac/svd.hpp"

namespace tecromac {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_same_shape(const Problem &p, const Eigen::Ref<const Matrix> &m, const char *what) {
  if (m.rows() != p.rows() || m.cols() != p.cols())
    throw DimensionError(std::string(what) + " does not match the data shape");
}

// Divergence is checked on every iteration for the scalar residual and the
// size of X, and every tenth iteration for the full iterates.
constexpr int kFiniteCheckPeriod = 10;
// An X this much larger than the data has blown up even if E cancels it.
constexpr double kBlowUpFactor = 1e8;

void check_finite(const Problem &p, const SolverState &s, double residual, const char *algorithm) {
  const std::string where = std::string(algorithm) + ": ";
  const bool periodic = s.iter % kFiniteCheckPeriod == 0;
  if (!std::isfinite(residual) || (periodic && !(s.x.allFinite() && s.e.allFinite() && s.z.allFinite())))
    throw DivergenceError(where + "non-finite iterate at iteration " + std::to_string(s.iter));
  if (!(s.x.norm() <= kBlowUpFactor * std::max(p.data.norm(), 1.0)))
    throw DivergenceError(where + "iterate blew up at iteration " + std::to_string(s.iter));
}

Index numerical_rank(const Matrix &x) {
  if (x.size() == 0) return 0;
  const Vector s = economy_svd(x).values;
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return static_cast<Index>((s.array() > 1e-8 * s(0)).count());
}

Solution zero_solution(const Problem &p) {
  Solution sol;
  sol.x = Matrix::Zero(p.rows(), p.cols());
  sol.diagnostics.converged = true;
  return sol;
}

}  // namespace

std::string to_string(Loss loss) { return loss == Loss::absolute ? "absolute" : "squared"; }
std::string to_string(Algorithm algorithm) { return algorithm == Algorithm::ipg ? "ipg" : "alt"; }

Loss parse_loss(const std::string &s) {
  if (s == "absolute" || s == "l1") return Loss::absolute;
  if (s == "squared" || s == "l2") return Loss::squared;
  throw std::invalid_argument("unknown loss '" + s + "'");
}

Algorithm parse_algorithm(const std::string &s) {
  if (s == "ipg") return Algorithm::ipg;
  if (s == "alt") return Algorithm::alt;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

void SolverConfig::validate(Index rows, Index cols) const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw std::invalid_argument("lambda1 and lambda2 must be nonnegative");
  if (mu0 && !(*mu0 > 0.0)) throw std::invalid_argument("mu0 must be positive");
  if (!(rho > 1.0)) throw std::invalid_argument("rho must exceed 1");
  if (!(mu_max_factor >= 1.0)) throw std::invalid_argument("mu_max_factor must be at least 1");
  if (!(primal_tol > 0.0) || !(inner_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
  if (max_outer <= 0 || max_inner <= 0) throw std::invalid_argument("iteration limits must be positive");
  if (step_eta && !(*step_eta > 0.0)) throw std::invalid_argument("step_eta must be positive");
  if (algorithm == Algorithm::alt && (rank <= 0 || rank > std::min(rows, cols)))
    throw std::invalid_argument("rank must lie in [1, min(rows, cols)]");
}

Problem::Problem(Matrix y, Matrix mask, Index channels, Index frames)
    : data(std::move(y)), observed(std::move(mask)), temporal(channels, frames) {
  if (data.rows() != observed.rows() || data.cols() != observed.cols())
    throw DimensionError("mask shape does not match the data shape");
  if (data.cols() != channels * frames) throw DimensionError("data columns must equal channels * frames");
  // Values outside the observed set must not reach the iterates.
  data.array() *= (observed.array() != 0.0).cast<double>();
}

Problem Problem::from(const DataMatrix &y, const ObservationMask &mask) {
  if (!mask.matches(y.dims)) throw DimensionError("mask dimensions do not match the sequence");
  return Problem(y.values, mask.to_matrix(y.dims.c), y.dims.c, y.dims.t);
}

double data_loss(const Problem &p, const Eigen::Ref<const Matrix> &e, Loss loss) {
  require_same_shape(p, e, "residual");
  if (loss == Loss::absolute) return (p.observed.array() * e.array().abs()).sum();
  return 0.5 * (p.observed.array() * e.array().square()).sum();
}

double tecromac_objective(const Problem &p, const Eigen::Ref<const Matrix> &x, double lambda1, double lambda2,
                          Loss loss) {
  require_same_shape(p, x, "X");
  return data_loss(p, p.data - x, loss) + lambda1 * nuclear_norm(x) + 0.5 * lambda2 * p.temporal.squared_norm(x);
}

double smooth_part(const Problem &p, const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &e,
                   const Eigen::Ref<const Matrix> &z, double mu, double lambda2) {
  require_same_shape(p, x, "X");
  const Matrix gap = p.data - x - e;
  return 0.5 * lambda2 * p.temporal.squared_norm(x) + (z.array() * gap.array()).sum() + 0.5 * mu * gap.squaredNorm();
}

double augmented_lagrangian(const Problem &p, const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &e,
                            const Eigen::Ref<const Matrix> &z, double mu, double lambda1, double lambda2, Loss loss) {
  if (!(mu > 0.0)) throw std::invalid_argument("augmented_lagrangian: mu must be positive");
  require_same_shape(p, e, "E");
  require_same_shape(p, z, "Z");
  return data_loss(p, e, loss) + lambda1 * nuclear_norm(x) + smooth_part(p, x, e, z, mu, lambda2);
}

Matrix grad_f(const Problem &p, const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &e,
              const Eigen::Ref<const Matrix> &z, double mu, double lambda2) {
  require_same_shape(p, x, "X");
  Matrix g = lambda2 * p.temporal.gram(x);
  g.noalias() -= z;
  g.noalias() -= mu * (p.data - x - e);
  return g;
}

double ipg_step_constant(double mu, double lambda2) {
  return 1.01 * (TemporalOperator::kGramNormBound * lambda2 + mu);
}

Matrix ipg_update_x(const Problem &p, const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &e,
                    const Eigen::Ref<const Matrix> &z, double mu, double c_step, double lambda1, double lambda2) {
  if (!(c_step > TemporalOperator::kGramNormBound * lambda2 + mu))
    throw std::invalid_argument("ipg_update_x: step constant must exceed 4 * lambda2 + mu");
  return svt(x - grad_f(p, x, e, z, mu, lambda2) / c_step, lambda1 / c_step);
}

Matrix update_e(const Problem &p, const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &z, double mu,
                Loss loss) {
  if (!(mu > 0.0)) throw std::invalid_argument("update_e: mu must be positive");
  require_same_shape(p, x, "X");
  Matrix shifted = p.data - x + z / mu;
  // Off the observed set the shifted residual passes through unchanged.
  if (loss == Loss::absolute) {
    const double inv_mu = 1.0 / mu;
    shifted.array() -= p.observed.array() *
                       (shifted.array() - shifted.array().sign() * (shifted.array().abs() - inv_mu).max(0.0));
  } else {
    shifted.array() *= 1.0 - p.observed.array() / (1.0 + mu);
  }
  return shifted;
}

Matrix update_dual(const Eigen::Ref<const Matrix> &z, double mu, const Eigen::Ref<const Matrix> &y,
                   const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &e) {
  if (z.rows() != y.rows() || z.cols() != y.cols() || x.rows() != y.rows() || x.cols() != y.cols() ||
      e.rows() != y.rows() || e.cols() != y.cols())
    throw DimensionError("update_dual: shapes disagree");
  return z + mu * (y - x - e);
}

double update_mu(double mu, double rho, double mu_max) {
  if (!(mu > 0.0) || !(rho > 1.0)) throw std::invalid_argument("update_mu: need mu > 0 and rho > 1");
  return std::min(rho * mu, mu_max);
}

double primal_residual(const Problem &p, const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &e) {
  const double scale = p.data.norm();
  const double gap = (p.data - x - e).norm();
  if (scale == 0.0) return gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return gap / scale;
}

bool check_convergence(const Problem &p, const Eigen::Ref<const Matrix> &x, const Eigen::Ref<const Matrix> &e,
                       double tol) {
  return primal_residual(p, x, e) <= tol;
}

double factored_lagrangian(const Problem &p, const Eigen::Ref<const Matrix> &u, const Eigen::Ref<const Matrix> &v,
                           const Eigen::Ref<const Matrix> &e, const Eigen::Ref<const Matrix> &z, double mu,
                           double lambda1, double lambda2, Loss loss) {
  const Matrix x = u * v.transpose();
  return data_loss(p, e, loss) + 0.5 * lambda1 * (u.squaredNorm() + v.squaredNorm()) +
         smooth_part(p, x, e, z, mu, lambda2);
}

Matrix grad_u(const Problem &p, const Eigen::Ref<const Matrix> &u, const Eigen::Ref<const Matrix> &v,
              const Eigen::Ref<const Matrix> &e, const Eigen::Ref<const Matrix> &z, double mu, double lambda1,
              double lambda2) {
  const Matrix x = u * v.transpose();
  const Matrix pull = z + mu * (p.data - x - e);
  Matrix g = lambda1 * u;
  g.noalias() += lambda2 * (u * (v.transpose() * p.temporal.gram_rows(v)));
  g.noalias() -= pull * v;
  return g;
}

Matrix grad_v(const Problem &p, const Eigen::Ref<const Matrix> &u, const Eigen::Ref<const Matrix> &v,
              const Eigen::Ref<const Matrix> &e, const Eigen::Ref<const Matrix> &z, double mu, double lambda1,
              double lambda2) {
  const Matrix x = u * v.transpose();
  const Matrix pull = z + mu * (p.data - x - e);
  Matrix g = lambda1 * v;
  g.noalias() += lambda2 * (p.temporal.gram_rows(v) * (u.transpose() * u));
  g.noalias() -= pull.transpose() * u;
  return g;
}

void write_trace(std::ostream &os, const std::vector<TraceRow> &trace) {
  os << "iteration\tobjective\tresidual\tmu\tseconds\n";
  os << std::setprecision(10);
  for (const TraceRow &r : trace)
    os << r.iteration << '\t' << r.objective << '\t' << r.residual << '\t' << r.mu << '\t' << r.seconds << '\n';
}

SolverState initial_state(const Problem &p, const SolverConfig &cfg, double &mu_max) {
  const double sigma = spectral_norm_estimate(p.data);
  const double inf_norm = p.data.cwiseAbs().maxCoeff();
  SolverState s;
  s.mu = cfg.mu0.value_or(1.25 / sigma);
  mu_max = cfg.mu_max_factor * s.mu;
  s.x = Matrix::Zero(p.rows(), p.cols());
  s.e = Matrix::Zero(p.rows(), p.cols());
  s.z = p.data / std::max(sigma, inf_norm);
  return s;
}

Solution solve_ipg(const Problem &p, const SolverConfig &cfg) {
  cfg.validate(p.rows(), p.cols());
  if (p.data.norm() == 0.0) return zero_solution(p);
  const auto start = Clock::now();

  double mu_max = 0.0;
  SolverState s = initial_state(p, cfg, mu_max);
  double residual = 1.0;
  bool converged = false;
  while (s.iter < cfg.max_outer) {
    ++s.iter;
    const double c = ipg_step_constant(s.mu, cfg.lambda2);
    const SvtResult step = svt_detailed(s.x - grad_f(p, s.x, s.e, s.z, s.mu, cfg.lambda2) / c, cfg.lambda1 / c);
    s.x = step.value;
    s.e = update_e(p, s.x, s.z, s.mu, cfg.loss);
    const Matrix gap = p.data - s.x - s.e;
    s.z.noalias() += s.mu * gap;
    residual = gap.norm() / p.data.norm();
    check_finite(p, s, residual, "ALM-IPG");

    const double objective = data_loss(p, p.data - s.x, cfg.loss) + cfg.lambda1 * step.nuclear +
                             0.5 * cfg.lambda2 * p.temporal.squared_norm(s.x);
    s.trace.push_back({s.iter, objective, residual, s.mu, seconds_since(start)});
    s.mu = update_mu(s.mu, cfg.rho, mu_max);
    if (residual <= cfg.primal_tol) {
      converged = true;
      break;
    }
  }

  Solution sol;
  sol.diagnostics.seconds = seconds_since(start);
  sol.diagnostics.residual = residual;
  sol.diagnostics.iterations = s.iter;
  sol.diagnostics.converged = converged;
  sol.diagnostics.rank = numerical_rank(s.x);
  sol.diagnostics.objective = tecromac_objective(p, s.x, cfg.lambda1, cfg.lambda2, cfg.loss);
  sol.diagnostics.trace = std::move(s.trace);
  sol.x = std::move(s.x);
  return sol;
}

namespace {

// Minimizer of a quadratic along -d given <g, d> and the curvature <d, H d>.
double exact_step(double slope, double curvature) {
  if (!(slope > 0.0) || !(curvature > 0.0)) return 0.0;
  return slope / curvature;
}

// Search direction g P^{-1} for an r x r symmetric positive semidefinite P.
// A tiny ridge keeps P invertible when factor columns vanish.
Matrix precondition(const Matrix &g, Matrix p) {
  const double ridge = 1e-12 * std::max(p.trace() / static_cast<double>(p.rows()), 1e-300);
  p.diagonal().array() += ridge;
  return Eigen::LLT<Matrix>(p).solve(g.transpose()).transpose();
}

}  // namespace

Solution solve_alt(const Problem &p, const SolverConfig &cfg) {
  cfg.validate(p.rows(), p.cols());
  if (p.data.norm() == 0.0) return zero_solution(p);
  const auto start = Clock::now();

  double mu_max = 0.0;
  SolverState s = initial_state(p, cfg, mu_max);

  // Balanced split of the truncated SVD of the zero-filled observations.
  const Index r = cfg.rank;
  const EconomySvd init = economy_svd(p.observed.cwiseProduct(p.data));
  const Vector root = init.values.head(r).cwiseSqrt();
  Matrix u = init.left.leftCols(r) * root.asDiagonal();
  Matrix v = init.right.leftCols(r) * root.asDiagonal();
  s.x = u * v.transpose();
  s.e = update_e(p, s.x, s.z, s.mu, cfg.loss);

  const double lambda1 = cfg.lambda1;
  const double lambda2 = cfg.lambda2;
  double residual = 1.0;
  bool converged = false;
  while (s.iter < cfg.max_outer) {
    ++s.iter;
    for (int inner = 0; inner < cfg.max_inner; ++inner) {
      // With E fixed, both block gradients only see Y - E through this term.
      const Matrix pull = s.z + s.mu * (p.data - s.e);

      const Matrix lv = p.temporal.gram_rows(v);
      const Matrix vtv = v.transpose() * v;
      const Matrix vtlv = v.transpose() * lv;
      // The U block is a quadratic whose Hessian acts as dU -> dU H with H r x r.
      Matrix hessian = lambda2 * vtlv + s.mu * vtv;
      hessian.diagonal().array() += lambda1;
      Matrix g = u * hessian;
      g.noalias() -= pull * v;
      if (cfg.step_eta) {
        u -= *cfg.step_eta * g;
      } else {
        const Matrix d = precondition(g, hessian);
        const Matrix dtd = d.transpose() * d;
        u -= exact_step(g.cwiseProduct(d).sum(), dtd.cwiseProduct(hessian).sum()) * d;
      }

      const Matrix utu = u.transpose() * u;
      g = lambda1 * v;
      g.noalias() += lambda2 * (lv * utu) + s.mu * (v * utu);
      g.noalias() -= pull.transpose() * u;
      if (cfg.step_eta) {
        v -= *cfg.step_eta * g;
      } else {
        // Preconditioned by the part of the V Hessian that ignores the small temporal coupling.
        Matrix approx = s.mu * utu;
        approx.diagonal().array() += lambda1;
        const Matrix d = precondition(g, approx);
        const Matrix dtd = d.transpose() * d;
        const Matrix dtld = d.transpose() * p.temporal.gram_rows(d);
        const double curvature =
            lambda1 * dtd.trace() + lambda2 * dtld.cwiseProduct(utu).sum() + s.mu * dtd.cwiseProduct(utu).sum();
        v -= exact_step(g.cwiseProduct(d).sum(), curvature) * d;
      }

      Matrix x = u * v.transpose();
      const double change = (x - s.x).norm();
      const double scale = std::max(s.x.norm(), std::numeric_limits<double>::min());
      s.x = std::move(x);
      s.e = update_e(p, s.x, s.z, s.mu, cfg.loss);
      if (change <= cfg.inner_tol * scale) break;
    }

    const Matrix gap = p.data - s.x - s.e;
    s.z.noalias() += s.mu * gap;
    residual = gap.norm() / p.data.norm();
    if (!u.allFinite() || !v.allFinite()) residual = std::numeric_limits<double>::quiet_NaN();
    check_finite(p, s, residual, "ALM-ALT");

    const double objective = data_loss(p, p.data - s.x, cfg.loss) +
                             0.5 * lambda1 * (u.squaredNorm() + v.squaredNorm()) +
                             0.5 * lambda2 * p.temporal.squared_norm(s.x);
    s.trace.push_back({s.iter, objective, residual, s.mu, seconds_since(start)});
    s.mu = update_mu(s.mu, cfg.rho, mu_max);
    if (residual <= cfg.primal_tol) {
      converged = true;
      break;
    }
  }

  Solution sol;
  sol.diagnostics.seconds = seconds_since(start);
  sol.diagnostics.residual = residual;
  sol.diagnostics.iterations = s.iter;
  sol.diagnostics.converged = converged;
  sol.diagnostics.rank = r;
  sol.diagnostics.objective = tecromac_objective(p, s.x, lambda1, lambda2, cfg.loss);
  sol.diagnostics.trace = std::move(s.trace);
  sol.x = std::move(s.x);
  return sol;
}

Solution solve(const Problem &p, const SolverConfig &cfg) {
  return cfg.algorithm == Algorithm::ipg ? solve_ipg(p, cfg) : solve_alt(p, cfg);
}

}  // namespace tecromac

#include "tecromac/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace tecromac {

Rng::Rng(std::uint64_t seed) : state_(seed) {}

std::uint64_t Rng::next() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

Index Rng::integer(Index lo, Index hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<Index>(next() % span);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  Rng rng(master ^ (stream * 0xd1b54a32d192ed03ULL));
  return rng.next();
}

void CloudSimParams::validate(Index frames) const {
  if (!(coverage >= 0.0 && coverage <= 1.0)) throw std::invalid_argument("cloud coverage must lie in [0, 1]");
  if (min_blobs < 0 || max_blobs < min_blobs) throw std::invalid_argument("invalid blob count range");
  if (!(min_blob_scale > 0.0 && max_blob_scale >= min_blob_scale))
    throw std::invalid_argument("invalid blob scale range");
  if (!(min_intensity >= 0.0 && max_intensity <= 1.0 && min_intensity <= max_intensity))
    throw std::invalid_argument("cloud intensity range must lie in [0, 1]");
  for (Index l : full_cover_frames)
    if (l < 0 || l >= frames) throw std::invalid_argument("full-cover frame index out of range");
}

namespace {

// Radial bump: opaque core, linear falloff in r^2 over the outer rim.
constexpr double kBumpGain = 2.5;

void add_bump(std::vector<double> &frame, Index m, Index n, double ci, double cj, double radius) {
  const double r2 = radius * radius;
  const Index i0 = std::max<Index>(0, static_cast<Index>(std::floor(ci - radius)));
  const Index i1 = std::min<Index>(m - 1, static_cast<Index>(std::ceil(ci + radius)));
  const Index j0 = std::max<Index>(0, static_cast<Index>(std::floor(cj - radius)));
  const Index j1 = std::min<Index>(n - 1, static_cast<Index>(std::ceil(cj + radius)));
  for (Index j = j0; j <= j1; ++j)
    for (Index i = i0; i <= i1; ++i) {
      const double d2 = (static_cast<double>(i) - ci) * (static_cast<double>(i) - ci) +
                        (static_cast<double>(j) - cj) * (static_cast<double>(j) - cj);
      if (d2 >= r2) continue;
      double &a = frame[static_cast<std::size_t>(i + m * j)];
      a = std::min(1.0, a + std::clamp(kBumpGain * (1.0 - d2 / r2), 0.0, 1.0));
    }
}

double covered_fraction(const std::vector<double> &frame) {
  const auto hits = std::count_if(frame.begin(), frame.end(), [](double a) { return a > kContaminationThreshold; });
  return static_cast<double>(hits) / static_cast<double>(frame.size());
}

constexpr double kCoverageSlack = 0.03;
constexpr int kFrameAttempts = 20;

}  // namespace

ScalarField generate_cloud_alpha(Index m, Index n, Index t, const CloudSimParams &params) {
  if (m <= 0 || n <= 0 || t <= 0) throw DimensionError("cloud field dimensions must be positive");
  params.validate(t);
  ScalarField alpha(m, n, t, 0.0);
  Rng rng(derive_seed(params.seed, 1));
  const double side = static_cast<double>(std::min(m, n));
  const std::size_t pixels = static_cast<std::size_t>(m * n);

  for (Index l = 0; l < t; ++l) {
    const bool full = std::find(params.full_cover_frames.begin(), params.full_cover_frames.end(), l) !=
                      params.full_cover_frames.end();
    std::vector<double> frame(pixels, full ? 1.0 : 0.0);
    if (!full && params.coverage > 0.0) {
      bool placed = false;
      for (int attempt = 0; attempt < kFrameAttempts && !placed; ++attempt) {
        std::fill(frame.begin(), frame.end(), 0.0);
        Index blobs = 0;
        int rejected = 0;
        while (blobs < params.max_blobs && rejected < 200) {
          std::vector<double> trial = frame;
          const double radius = side * rng.uniform(params.min_blob_scale, params.max_blob_scale);
          add_bump(trial, m, n, rng.uniform(0.0, static_cast<double>(m)), rng.uniform(0.0, static_cast<double>(n)),
                   radius);
          const double cov = covered_fraction(trial);
          if (cov > params.coverage + kCoverageSlack && blobs >= params.min_blobs) {
            ++rejected;
            continue;
          }
          frame = std::move(trial);
          ++blobs;
          if (blobs >= params.min_blobs && cov >= params.coverage - kCoverageSlack) break;
        }
        placed = std::abs(covered_fraction(frame) - params.coverage) <= kCoverageSlack;
      }
      if (!placed)
        throw InfeasibleCoverageError("could not reach cloud coverage " + std::to_string(params.coverage) +
                                      " on frame " + std::to_string(l));
    }
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < m; ++i) alpha(i, j, l) = frame[static_cast<std::size_t>(i + m * j)];
  }
  return alpha;
}

CloudyScene composite_clouds(const ImageSequence &clean, const ScalarField &alpha, const CloudSimParams &params) {
  const Dims &d = clean.dims();
  if (alpha.m() != d.m || alpha.n() != d.n || alpha.t() != d.t)
    throw DimensionError("opacity field does not match the sequence");
  Rng rng(derive_seed(params.seed, 2));
  CloudyScene scene{clean, ObservationMask(d.m, d.n, d.t, true)};
  for (Index l = 0; l < d.t; ++l)
    for (Index j = 0; j < d.n; ++j)
      for (Index i = 0; i < d.m; ++i) {
        const double a = alpha(i, j, l);
        const double white = rng.uniform(params.min_intensity, params.max_intensity);
        scene.truth.set(i, j, l, a <= kContaminationThreshold);
        if (a == 0.0) continue;
        for (Index k = 0; k < d.c; ++k) scene.cloudy(i, j, k, l) = (1.0 - a) * clean(i, j, k, l) + a * white;
      }
  return scene;
}

double rre(const Eigen::Ref<const Matrix> &estimate, const Eigen::Ref<const Matrix> &truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw DimensionError("rre: shapes differ");
  const double denom = truth.squaredNorm();
  if (denom == 0.0) throw std::invalid_argument("rre: reference is identically zero");
  return (estimate - truth).squaredNorm() / denom;
}

double rre(const ImageSequence &estimate, const ImageSequence &truth) {
  if (!(estimate.dims() == truth.dims())) throw DimensionError("rre: dimensions differ");
  const Eigen::Map<const Vector> a(estimate.data().data(), static_cast<Index>(estimate.size()));
  const Eigen::Map<const Vector> b(truth.data().data(), static_cast<Index>(truth.size()));
  return rre(a, b);
}

namespace {

Matrix frame_columns(const Eigen::Ref<const Matrix> &x, const Dims &dims, Index frame) {
  Matrix out(x.rows(), dims.c);
  for (Index k = 0; k < dims.c; ++k) out.col(k) = x.col(DataMatrix::column(dims, k, frame));
  return out;
}

}  // namespace

double frame_rre(const Eigen::Ref<const Matrix> &estimate, const Eigen::Ref<const Matrix> &truth, const Dims &dims,
                 Index frame) {
  return rre(frame_columns(estimate, dims, frame), frame_columns(truth, dims, frame));
}

double frame_norm(const Eigen::Ref<const Matrix> &x, const Dims &dims, Index frame) {
  return frame_columns(x, dims, frame).norm();
}

ImageSequence smooth_low_rank_sequence(const Dims &dims, Index rank, std::uint64_t seed, double max_value) {
  if (!dims.valid() || rank <= 0) throw std::invalid_argument("smooth_low_rank_sequence: bad dimensions or rank");
  Rng rng(derive_seed(seed, 3));
  Matrix spatial(dims.pixels(), rank);
  for (Index q = 0; q < rank; ++q)
    for (Index u = 0; u < dims.pixels(); ++u) spatial(u, q) = rng.uniform(0.5, 1.0);
  Matrix temporal(dims.columns(), rank);
  for (Index q = 0; q < rank; ++q) {
    const double cycles = static_cast<double>(q + 1);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (Index k = 0; k < dims.c; ++k) {
      const double gain = rng.uniform(0.5, 1.0);
      for (Index l = 0; l < dims.t; ++l) {
        const double s = 2.0 * std::numbers::pi * cycles * static_cast<double>(l) / static_cast<double>(dims.t);
        temporal(DataMatrix::column(dims, k, l), q) = gain * (1.0 + 0.6 * std::sin(s + phase));
      }
    }
  }
  Matrix values = spatial * temporal.transpose();
  values *= max_value / values.maxCoeff();
  return reshape_to_sequence(DataMatrix(std::move(values), dims));
}

const MethodResult &ExperimentReport::result(Method m) const {
  for (const MethodResult &r : methods)
    if (r.method == m) return r;
  throw std::out_of_range("experiment report has no result for " + to_string(m));
}

ExperimentReport run_experiment(const ImageSequence &clean, const CloudSimParams &sim, const DetectorConfig &detector,
                                const SolverConfig &solver, const std::vector<Method> &methods,
                                const ExperimentOptions &options) {
  const Dims &d = clean.dims();
  const ScalarField alpha = generate_cloud_alpha(d.m, d.n, d.t, sim);
  CloudyScene scene = composite_clouds(clean, alpha, sim);
  const DetectionReport detection = detect_clouds(scene.cloudy, detector);

  ExperimentReport report;
  report.detection = score_detection(detection.mask, scene.truth);
  report.observed = detection.mask.count();
  report.rescued = detection.rescued;

  if (options.corruption_fraction > 0.0) {
    Rng rng(derive_seed(sim.seed, 4));
    for (Index l = 0; l < d.t; ++l)
      for (Index j = 0; j < d.n; ++j)
        for (Index i = 0; i < d.m; ++i)
          if (detection.mask(i, j, l) && rng.uniform() < options.corruption_fraction)
            for (Index k = 0; k < d.c; ++k) scene.cloudy(i, j, k, l) = options.corruption_value;
  }

  const Problem problem = Problem::from(reshape_to_matrix(scene.cloudy), detection.mask);
  const Matrix truth = reshape_to_matrix(clean).values;

  SolverConfig cfg = solver;
  if (options.scale_lambdas) {
    const double s = static_cast<double>(report.observed) / static_cast<double>(d.m * d.n * d.t);
    cfg.lambda1 *= s;
    cfg.lambda2 *= s;
  }
  report.lambda1 = cfg.lambda1;
  report.lambda2 = cfg.lambda2;

  for (std::size_t idx = 0; idx < methods.size(); ++idx) {
    SolverConfig method_cfg = cfg;
    method_cfg.seed = derive_seed(solver.seed, 100 + static_cast<std::uint64_t>(methods[idx]));
    Solution sol = reconstruct(problem, methods[idx], method_cfg);
    MethodResult r;
    r.method = methods[idx];
    r.rre = rre(sol.x, truth);
    for (Index l = 0; l < d.t; ++l) r.frame_rre.push_back(frame_rre(sol.x, truth, d, l));
    r.diagnostics = std::move(sol.diagnostics);
    r.reconstruction = std::move(sol.x);
    report.methods.push_back(std::move(r));
  }

  std::ostringstream fc;
  for (std::size_t i = 0; i < sim.full_cover_frames.size(); ++i) fc << (i ? "," : "") << sim.full_cover_frames[i];
  report.config = {
      {"dims", std::to_string(d.m) + "x" + std::to_string(d.n) + "x" + std::to_string(d.c) + "x" + std::to_string(d.t)},
      {"coverage", std::to_string(sim.coverage)},
      {"full_cover_frames", fc.str()},
      {"sim_seed", std::to_string(sim.seed)},
      {"gamma", std::to_string(detector.gamma)},
      {"k_neighbors", std::to_string(detector.resolved_k(d.t))},
      {"algorithm", to_string(solver.algorithm)},
      {"rank", std::to_string(solver.rank)},
      {"scale_lambdas", options.scale_lambdas ? "true" : "false"},
      {"corruption_fraction", std::to_string(options.corruption_fraction)},
  };
  return report;
}

void write_report_table(std::ostream &os, const ExperimentReport &report, bool include_timings) {
  os << std::setprecision(8);
  os << "# detection_precision\t" << report.detection.precision << '\n';
  os << "# detection_recall\t" << report.detection.recall << '\n';
  os << "# lambda1\t" << report.lambda1 << "\n# lambda2\t" << report.lambda2 << '\n';
  os << "method\trre\titerations\tresidual\tconverged";
  if (include_timings) os << "\tseconds";
  os << '\n';
  for (const MethodResult &r : report.methods) {
    os << to_string(r.method) << '\t' << r.rre << '\t' << r.diagnostics.iterations << '\t' << r.diagnostics.residual
       << '\t' << (r.diagnostics.converged ? 1 : 0);
    if (include_timings) os << '\t' << r.diagnostics.seconds;
    os << '\n';
  }
}

void write_report_kv(std::ostream &os, const ExperimentReport &report, bool include_timings) {
  os << std::setprecision(10);
  for (const auto &[key, value] : report.config) os << "config." << key << '=' << value << '\n';
  os << "detection.precision=" << report.detection.precision << '\n';
  os << "detection.recall=" << report.detection.recall << '\n';
  os << "detection.observed=" << report.observed << '\n';
  os << "detection.rescued=" << report.rescued << '\n';
  os << "lambda1=" << report.lambda1 << "\nlambda2=" << report.lambda2 << '\n';
  for (const MethodResult &r : report.methods) {
    const std::string prefix = "method." + to_string(r.method) + '.';
    os << prefix << "rre=" << r.rre << '\n';
    os << prefix << "iterations=" << r.diagnostics.iterations << '\n';
    os << prefix << "residual=" << r.diagnostics.residual << '\n';
    os << prefix << "objective=" << r.diagnostics.objective << '\n';
    os << prefix << "rank=" << r.diagnostics.rank << '\n';
    if (include_timings) os << prefix << "seconds=" << r.diagnostics.seconds << '\n';
  }
}

}  // namespace tecromac

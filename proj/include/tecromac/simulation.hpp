#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tecromac/baselines.hpp"
#include "tecromac/detection.hpp"

namespace tecromac {

class InfeasibleCoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic 64-bit generator with a portable uniform draw.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi].
  Index integer(Index lo, Index hi);

 private:
  std::uint64_t state_;
};

/// Seed for a named sub-stream of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

struct CloudSimParams {
  /// Target fraction of entries with opacity above 0.5, per frame.
  double coverage = 0.4;
  Index min_blobs = 1;
  Index max_blobs = 64;
  /// Blob radius range as a fraction of min(m, n).
  double min_blob_scale = 0.1;
  double max_blob_scale = 0.3;
  double min_intensity = 0.8;
  double max_intensity = 1.0;
  std::vector<Index> full_cover_frames;
  std::uint64_t seed = 0;

  void validate(Index frames) const;
};

/// Opacity threshold above which an entry counts as cloud-contaminated.
inline constexpr double kContaminationThreshold = 0.5;

/// Per-frame opacity built from clipped radial bumps. Frames in
/// full_cover_frames are opaque everywhere; every other frame lands within
/// 0.03 of the target coverage or the draw is repeated (at most 20 times).
ScalarField generate_cloud_alpha(Index m, Index n, Index t, const CloudSimParams &params);

struct CloudyScene {
  ImageSequence cloudy;
  ObservationMask truth;
};

/// Alpha-composite toward white: (1 - a) * clean + a * w with w drawn per
/// (i, j, l) in [min_intensity, max_intensity]. Truth marks a <= 0.5.
CloudyScene composite_clouds(const ImageSequence &clean, const ScalarField &alpha, const CloudSimParams &params);

/// ||estimate - truth||_F^2 / ||truth||_F^2.
double rre(const Eigen::Ref<const Matrix> &estimate, const Eigen::Ref<const Matrix> &truth);
double rre(const ImageSequence &estimate, const ImageSequence &truth);

/// RRE restricted to the columns of frame l.
double frame_rre(const Eigen::Ref<const Matrix> &estimate, const Eigen::Ref<const Matrix> &truth, const Dims &dims,
                 Index frame);
double frame_norm(const Eigen::Ref<const Matrix> &x, const Dims &dims, Index frame);

/// Exactly rank-`rank` sequence with smooth temporal profiles and values in
/// [0, max_value].
ImageSequence smooth_low_rank_sequence(const Dims &dims, Index rank, std::uint64_t seed, double max_value = 0.5);

struct ExperimentOptions {
  /// Multiply lambda1 and lambda2 by |Omega| / (m n c t) of the detected mask.
  bool scale_lambdas = false;
  /// Fraction of detected-observed entries overwritten with corruption_value
  /// after detection.
  double corruption_fraction = 0.0;
  double corruption_value = 1.0;
};

struct MethodResult {
  Method method = Method::tecromac;
  double rre = 0.0;
  std::vector<double> frame_rre;
  Diagnostics diagnostics;
  Matrix reconstruction;
};

struct ExperimentReport {
  DetectionScore detection;
  std::size_t observed = 0;
  std::size_t rescued = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::vector<MethodResult> methods;
  std::map<std::string, std::string> config;

  const MethodResult &result(Method m) const;
};

ExperimentReport run_experiment(const ImageSequence &clean, const CloudSimParams &sim, const DetectorConfig &detector,
                                const SolverConfig &solver, const std::vector<Method> &methods,
                                const ExperimentOptions &options = {});

/// Delimited table, one row per method. Timings are left out unless asked
/// for so that reports are reproducible byte for byte.
void write_report_table(std::ostream &os, const ExperimentReport &report, bool include_timings = false);
/// Flat key=value lines.
void write_report_kv(std::ostream &os, const ExperimentReport &report, bool include_timings = false);

}  // namespace tecromac

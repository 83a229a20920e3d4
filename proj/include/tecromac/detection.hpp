#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tecromac/tensor.hpp"

namespace tecromac {

/// Default dark-channel threshold.
inline constexpr double kDefaultGamma = 0.6;

struct DetectorConfig {
  double gamma = kDefaultGamma;
  /// Neighbours kept per always-white pixel; 0 selects max(1, ceil(0.1 * t)).
  Index k_neighbors = 0;

  Index resolved_k(Index frames) const;
  void validate(Index frames) const;
};

struct Pixel {
  Index i = 0;
  Index j = 0;
  friend bool operator==(const Pixel &, const Pixel &) = default;
};

struct DetectionReport {
  ObservationMask mask;
  std::vector<Pixel> always_white;
  std::size_t rescued = 0;
};

/// Per-pixel, per-frame minimum over channels, laid out as an (m, n, t) field
/// with i fastest.
class ScalarField {
 public:
  ScalarField(Index m, Index n, Index t, double fill = 0.0)
      : m_(m), n_(n), t_(t), values_(static_cast<std::size_t>(m * n * t), fill) {}

  Index m() const { return m_; }
  Index n() const { return n_; }
  Index t() const { return t_; }
  double &operator()(Index i, Index j, Index l) { return values_[offset(i, j, l)]; }
  double operator()(Index i, Index j, Index l) const { return values_[offset(i, j, l)]; }
  const std::vector<double> &values() const { return values_; }

  friend bool operator==(const ScalarField &, const ScalarField &) = default;

 private:
  std::size_t offset(Index i, Index j, Index l) const {
    return static_cast<std::size_t>(i + m_ * (j + n_ * l));
  }

  Index m_, n_, t_;
  std::vector<double> values_;
};

ScalarField dark_channel(const ImageSequence &seq);

/// Entries whose dark channel is strictly below gamma are observed.
ObservationMask threshold_mask(const ImageSequence &seq, double gamma);

/// Pixels that are unobserved in every frame, in (j, i) raster order.
std::vector<Pixel> find_always_white(const ObservationMask &mask);

/// Componentwise temporal median of one pixel's channel vectors. Even-length
/// series take the lower midpoint.
Vector median_pixel(const ImageSequence &seq, Index i, Index j);

/// The k frames whose channel vectors are closest (Euclidean) to `center`,
/// ties broken toward the earlier frame. Returned in increasing frame order.
std::vector<Index> knn_recover(const ImageSequence &seq, Index i, Index j, const Vector &center, Index k);

/// Dark-channel thresholding followed by median/kNN rescue of always-white
/// pixels.
DetectionReport detect_clouds(const ImageSequence &seq, const DetectorConfig &cfg);

/// Precision and recall of the unobserved (cloud) class against a reference.
struct DetectionScore {
  double precision = 0.0;
  double recall = 0.0;
};
DetectionScore score_detection(const ObservationMask &detected, const ObservationMask &truth);

}  // namespace tecromac

#include "tecromac/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tecromac {

Index DetectorConfig::resolved_k(Index frames) const {
  if (k_neighbors > 0) return k_neighbors;
  return std::max<Index>(1, static_cast<Index>(std::ceil(0.1 * static_cast<double>(frames))));
}

void DetectorConfig::validate(Index frames) const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("detector gamma must lie in (0, 1)");
  if (k_neighbors < 0 || resolved_k(frames) > frames)
    throw std::invalid_argument("detector K must lie in [1, t]");
}

ScalarField dark_channel(const ImageSequence &seq) {
  const Dims &d = seq.dims();
  ScalarField out(d.m, d.n, d.t);
  for (Index l = 0; l < d.t; ++l)
    for (Index j = 0; j < d.n; ++j)
      for (Index i = 0; i < d.m; ++i) {
        double lowest = seq(i, j, 0, l);
        for (Index k = 1; k < d.c; ++k) lowest = std::min(lowest, seq(i, j, k, l));
        out(i, j, l) = lowest;
      }
  return out;
}

ObservationMask threshold_mask(const ImageSequence &seq, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("threshold gamma must lie in (0, 1)");
  const ScalarField dark = dark_channel(seq);
  const Dims &d = seq.dims();
  ObservationMask mask(d.m, d.n, d.t, false);
  for (Index l = 0; l < d.t; ++l)
    for (Index j = 0; j < d.n; ++j)
      for (Index i = 0; i < d.m; ++i) mask.set(i, j, l, dark(i, j, l) < gamma);
  return mask;
}

std::vector<Pixel> find_always_white(const ObservationMask &mask) {
  std::vector<Pixel> out;
  for (Index j = 0; j < mask.n(); ++j)
    for (Index i = 0; i < mask.m(); ++i) {
      bool seen = false;
      for (Index l = 0; l < mask.t() && !seen; ++l) seen = mask(i, j, l);
      if (!seen) out.push_back({i, j});
    }
  return out;
}

Vector median_pixel(const ImageSequence &seq, Index i, Index j) {
  const Dims &d = seq.dims();
  if (i < 0 || i >= d.m || j < 0 || j >= d.n) throw std::out_of_range("median_pixel: pixel outside image");
  Vector out(d.c);
  std::vector<double> series(static_cast<std::size_t>(d.t));
  const auto mid = static_cast<std::size_t>((d.t - 1) / 2);
  for (Index k = 0; k < d.c; ++k) {
    for (Index l = 0; l < d.t; ++l) series[static_cast<std::size_t>(l)] = seq(i, j, k, l);
    std::nth_element(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(mid), series.end());
    out(k) = series[mid];
  }
  return out;
}

std::vector<Index> knn_recover(const ImageSequence &seq, Index i, Index j, const Vector &center, Index k) {
  const Dims &d = seq.dims();
  if (k < 1 || k > d.t) throw std::invalid_argument("knn_recover: K must lie in [1, t], got " + std::to_string(k));
  if (center.size() != d.c) throw DimensionError("knn_recover: center has wrong channel count");

  std::vector<double> dist(static_cast<std::size_t>(d.t));
  for (Index l = 0; l < d.t; ++l) {
    double s = 0.0;
    for (Index ch = 0; ch < d.c; ++ch) {
      const double diff = seq(i, j, ch, l) - center(ch);
      s += diff * diff;
    }
    dist[static_cast<std::size_t>(l)] = s;
  }
  std::vector<Index> order(static_cast<std::size_t>(d.t));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return dist[static_cast<std::size_t>(a)] < dist[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

DetectionReport detect_clouds(const ImageSequence &seq, const DetectorConfig &cfg) {
  const Dims &d = seq.dims();
  cfg.validate(d.t);
  const Index k = cfg.resolved_k(d.t);

  DetectionReport report;
  report.mask = threshold_mask(seq, cfg.gamma);
  report.always_white = find_always_white(report.mask);
  for (const Pixel &p : report.always_white) {
    const Vector center = median_pixel(seq, p.i, p.j);
    for (Index l : knn_recover(seq, p.i, p.j, center, k)) {
      report.mask.set(p.i, p.j, l, true);
      ++report.rescued;
    }
  }
  return report;
}

DetectionScore score_detection(const ObservationMask &detected, const ObservationMask &truth) {
  if (detected.m() != truth.m() || detected.n() != truth.n() || detected.t() != truth.t())
    throw DimensionError("score_detection: mask shapes differ");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (Index l = 0; l < truth.t(); ++l)
    for (Index j = 0; j < truth.n(); ++j)
      for (Index i = 0; i < truth.m(); ++i) {
        const bool cloud_pred = !detected(i, j, l);
        const bool cloud_true = !truth(i, j, l);
        if (cloud_pred && cloud_true) ++tp;
        else if (cloud_pred) ++fp;
        else if (cloud_true) ++fn;
      }
  DetectionScore s;
  s.precision = (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  s.recall = (tp + fn) == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  return s;
}

}  // namespace tecromac

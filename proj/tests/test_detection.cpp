#include <doctest.h>

#include <algorithm>
#include <random>

#include "tecromac/detection.hpp"

using namespace tecromac;

namespace {

ImageSequence random_sequence(Dims d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageSequence seq(d);
  for (double &v : seq.data()) v = u(rng);
  return seq;
}

ImageSequence single_pixel(const std::vector<std::vector<double>> &frames) {
  const Index c = static_cast<Index>(frames.front().size());
  ImageSequence seq(Dims{1, 1, c, static_cast<Index>(frames.size())});
  for (std::size_t l = 0; l < frames.size(); ++l)
    for (Index k = 0; k < c; ++k) seq(0, 0, k, static_cast<Index>(l)) = frames[l][static_cast<std::size_t>(k)];
  return seq;
}

}  // namespace

TEST_CASE("dark_channel") {
  const ImageSequence rgb = single_pixel({{0.7, 0.8, 0.9}});
  CHECK(dark_channel(rgb)(0, 0, 0) == 0.7);

  const ImageSequence gray = random_sequence(Dims{3, 4, 1, 5}, 1);
  const ScalarField dark = dark_channel(gray);
  for (Index l = 0; l < 5; ++l)
    for (Index j = 0; j < 4; ++j)
      for (Index i = 0; i < 3; ++i) CHECK(dark(i, j, l) == gray(i, j, 0, l));

  const ImageSequence seq = random_sequence(Dims{4, 3, 3, 6}, 2);
  const ScalarField d2 = dark_channel(seq);
  for (Index l = 0; l < 6; ++l)
    for (Index j = 0; j < 3; ++j)
      for (Index i = 0; i < 4; ++i)
        CHECK(d2(i, j, l) == std::min({seq(i, j, 0, l), seq(i, j, 1, l), seq(i, j, 2, l)}));
}

TEST_CASE("threshold_mask") {
  CHECK_FALSE(threshold_mask(single_pixel({{0.7, 0.8, 0.9}}), 0.6)(0, 0, 0));
  CHECK(threshold_mask(single_pixel({{0.1, 0.9, 0.9}}), 0.6)(0, 0, 0));
  CHECK(threshold_mask(ImageSequence(Dims{3, 3, 3, 4}, 0.0), 0.6).count() == 36);
  CHECK_THROWS_AS(threshold_mask(ImageSequence(Dims{1, 1, 1, 1}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(threshold_mask(ImageSequence(Dims{1, 1, 1, 1}), 1.0), std::invalid_argument);
}

TEST_CASE("threshold_mask is monotone in gamma") {
  const ImageSequence seq = random_sequence(Dims{6, 5, 3, 7}, 3);
  for (double lo = 0.05; lo < 0.95; lo += 0.1) {
    const ObservationMask small = threshold_mask(seq, lo);
    const ObservationMask large = threshold_mask(seq, lo + 0.05);
    for (Index l = 0; l < 7; ++l)
      for (Index j = 0; j < 5; ++j)
        for (Index i = 0; i < 6; ++i)
          if (small(i, j, l)) CHECK(large(i, j, l));
  }
}

TEST_CASE("find_always_white") {
  ObservationMask full(4, 3, 5, true);
  CHECK(find_always_white(full).empty());

  ObservationMask one(4, 3, 5, true);
  for (Index l = 0; l < 5; ++l) one.set(2, 1, l, false);
  const auto white = find_always_white(one);
  REQUIRE(white.size() == 1);
  CHECK(white[0] == Pixel{2, 1});

  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.2);
  ObservationMask random(6, 6, 3, false);
  for (Index l = 0; l < 3; ++l)
    for (Index j = 0; j < 6; ++j)
      for (Index i = 0; i < 6; ++i) random.set(i, j, l, coin(rng));
  std::vector<Pixel> expected;
  for (Index j = 0; j < 6; ++j)
    for (Index i = 0; i < 6; ++i)
      if (!random(i, j, 0) && !random(i, j, 1) && !random(i, j, 2)) expected.push_back({i, j});
  CHECK(find_always_white(random) == expected);
}

TEST_CASE("median_pixel") {
  const ImageSequence constant = single_pixel({{0.2, 0.4}, {0.2, 0.4}, {0.2, 0.4}});
  CHECK(median_pixel(constant, 0, 0) == Vector{{0.2, 0.4}});
  CHECK(median_pixel(single_pixel({{0.1}, {0.9}, {0.5}}), 0, 0)(0) == 0.5);
  // Even length: lower midpoint of the sorted values.
  CHECK(median_pixel(single_pixel({{0.4}, {0.1}, {0.9}, {0.3}}), 0, 0)(0) == 0.3);

  const ImageSequence seq = random_sequence(Dims{2, 2, 3, 8}, 5);
  for (Index k = 0; k < 3; ++k) {
    std::vector<double> series;
    for (Index l = 0; l < 8; ++l) series.push_back(seq(1, 0, k, l));
    std::sort(series.begin(), series.end());
    CHECK(median_pixel(seq, 1, 0)(k) == series[3]);
  }
}

TEST_CASE("knn_recover") {
  const ImageSequence seq = single_pixel({{0.90}, {0.91}, {0.99}, {0.98}});
  CHECK(knn_recover(seq, 0, 0, Vector::Constant(1, 0.945), 2) == std::vector<Index>{1, 3});
  CHECK(knn_recover(seq, 0, 0, Vector::Constant(1, 0.5), 4) == std::vector<Index>{0, 1, 2, 3});
  CHECK_THROWS_AS(knn_recover(seq, 0, 0, Vector::Constant(1, 0.5), 0), std::invalid_argument);
  CHECK_THROWS_AS(knn_recover(seq, 0, 0, Vector::Constant(1, 0.5), 5), std::invalid_argument);

  // Exact ties resolve toward the earlier frame.
  const ImageSequence tied = single_pixel({{0.25}, {0.75}, {0.25}, {0.75}});
  CHECK(knn_recover(tied, 0, 0, Vector::Constant(1, 0.5), 2) == std::vector<Index>{0, 1});

  const ImageSequence rnd = random_sequence(Dims{1, 1, 3, 12}, 6);
  const Vector center = median_pixel(rnd, 0, 0);
  std::vector<std::pair<double, Index>> order;
  for (Index l = 0; l < 12; ++l) {
    double d = 0.0;
    for (Index k = 0; k < 3; ++k) d += (rnd(0, 0, k, l) - center(k)) * (rnd(0, 0, k, l) - center(k));
    order.push_back({d, l});
  }
  std::sort(order.begin(), order.end());
  std::vector<Index> expected;
  for (int q = 0; q < 5; ++q) expected.push_back(order[static_cast<std::size_t>(q)].second);
  std::sort(expected.begin(), expected.end());
  CHECK(knn_recover(rnd, 0, 0, center, 5) == expected);
}

TEST_CASE("detect_clouds") {
  SUBCASE("no always-white pixels leaves the threshold mask untouched") {
    ImageSequence seq = random_sequence(Dims{5, 5, 3, 6}, 7);
    for (Index j = 0; j < 5; ++j)
      for (Index i = 0; i < 5; ++i) seq(i, j, 0, 0) = 0.0;  // every pixel observed in frame 0
    const DetectionReport r = detect_clouds(seq, DetectorConfig{0.6, 2});
    CHECK(r.always_white.empty());
    CHECK(r.rescued == 0);
    CHECK(r.mask == threshold_mask(seq, 0.6));
  }
  SUBCASE("white house pixel keeps exactly K frames") {
    ImageSequence seq(Dims{4, 4, 3, 10}, 0.3);
    for (Index l = 0; l < 10; ++l)
      for (Index k = 0; k < 3; ++k) seq(2, 3, k, l) = 0.85 + 0.01 * static_cast<double>(l % 4);
    for (Index k = 0; k < 3; ++k) seq(1, 1, k, 4) = 0.95;  // transient cloud on another pixel
    const DetectionReport r = detect_clouds(seq, DetectorConfig{0.6, 3});
    REQUIRE(r.always_white.size() == 1);
    CHECK(r.always_white[0] == Pixel{2, 3});
    CHECK(r.rescued == 3);
    Index kept = 0;
    for (Index l = 0; l < 10; ++l) kept += r.mask(2, 3, l) ? 1 : 0;
    CHECK(kept == 3);
    CHECK_FALSE(r.mask(1, 1, 4));
  }
  SUBCASE("post-processing only adds entries and is deterministic") {
    ImageSequence seq = random_sequence(Dims{6, 6, 3, 9}, 8);
    for (Index l = 0; l < 9; ++l)
      for (Index k = 0; k < 3; ++k) {
        seq(0, 0, k, l) = 0.7 + 0.03 * static_cast<double>(l);
        seq(5, 2, k, l) = 0.99;
      }
    const DetectorConfig cfg{0.6, 0};
    const DetectionReport a = detect_clouds(seq, cfg);
    const DetectionReport b = detect_clouds(seq, cfg);
    CHECK(a.mask == b.mask);
    const ObservationMask base = threshold_mask(seq, 0.6);
    for (Index l = 0; l < 9; ++l)
      for (Index j = 0; j < 6; ++j)
        for (Index i = 0; i < 6; ++i)
          if (base(i, j, l)) CHECK(a.mask(i, j, l));
    const Index k = cfg.resolved_k(9);
    CHECK(k == 1);
    CHECK(a.rescued == a.always_white.size() * static_cast<std::size_t>(k));
    // Every added entry belongs to an always-white pixel.
    for (Index l = 0; l < 9; ++l)
      for (Index j = 0; j < 6; ++j)
        for (Index i = 0; i < 6; ++i)
          if (a.mask(i, j, l) && !base(i, j, l))
            CHECK(std::find(a.always_white.begin(), a.always_white.end(), Pixel{i, j}) != a.always_white.end());
  }
  SUBCASE("config validation") {
    const ImageSequence seq(Dims{2, 2, 1, 4}, 0.1);
    CHECK_THROWS_AS(detect_clouds(seq, DetectorConfig{1.2, 1}), std::invalid_argument);
    CHECK_THROWS_AS(detect_clouds(seq, DetectorConfig{0.6, 5}), std::invalid_argument);
    CHECK(DetectorConfig{}.resolved_k(30) == 3);
    CHECK(DetectorConfig{}.resolved_k(1) == 1);
  }
}

TEST_CASE("score_detection") {
  ObservationMask truth(2, 2, 1, true);
  truth.set(0, 0, 0, false);
  truth.set(1, 0, 0, false);
  ObservationMask detected(2, 2, 1, true);
  detected.set(0, 0, 0, false);
  detected.set(0, 1, 0, false);
  const DetectionScore s = score_detection(detected, truth);
  CHECK(s.precision == 0.5);
  CHECK(s.recall == 0.5);
  CHECK(score_detection(truth, truth).precision == 1.0);
}

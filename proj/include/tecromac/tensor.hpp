#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace tecromac {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Extent of an image sequence: rows m, cols n, channels c, frames t.
struct Dims {
  Index m = 0;
  Index n = 0;
  Index c = 0;
  Index t = 0;

  Index pixels() const { return m * n; }
  Index columns() const { return c * t; }
  Index size() const { return m * n * c * t; }
  bool valid() const { return m > 0 && n > 0 && c > 0 && t > 0; }

  friend bool operator==(const Dims &, const Dims &) = default;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense 4th-order tensor (height x width x channels x time).
///
/// Storage order is i fastest, then j, then k, then l; this is also the
/// payload order of the raw tensor file format.
class ImageSequence {
 public:
  ImageSequence() = default;
  explicit ImageSequence(Dims dims, double fill = 0.0);
  ImageSequence(Dims dims, std::vector<double> data);

  const Dims &dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }

  double &operator()(Index i, Index j, Index k, Index l) { return data_[offset(i, j, k, l)]; }
  double operator()(Index i, Index j, Index k, Index l) const { return data_[offset(i, j, k, l)]; }

  const std::vector<double> &data() const { return data_; }
  std::vector<double> &data() { return data_; }

  /// True when every value is finite and inside [0, 1].
  bool normalized() const;

  friend bool operator==(const ImageSequence &, const ImageSequence &) = default;

 private:
  std::size_t offset(Index i, Index j, Index k, Index l) const {
    return static_cast<std::size_t>(i + dims_.m * (j + dims_.n * (k + dims_.c * l)));
  }

  Dims dims_{};
  std::vector<double> data_;
};

/// The (m*n) x (c*t) unfolding of an ImageSequence.
///
/// Row u = i + j*m, column v = l + k*t: each channel owns a contiguous
/// block of t columns ordered by time.
struct DataMatrix {
  Matrix values;
  Dims dims{};

  DataMatrix() = default;
  DataMatrix(Matrix v, Dims d);

  static Index row(const Dims &d, Index i, Index j) { return i + j * d.m; }
  static Index column(const Dims &d, Index k, Index l) { return l + k * d.t; }
};

/// Boolean field over (i, j, l); true marks an entry in the observed set.
/// A mask entry applies to every channel of that pixel and frame.
class ObservationMask {
 public:
  ObservationMask() = default;
  ObservationMask(Index m, Index n, Index t, bool fill = true);

  Index m() const { return m_; }
  Index n() const { return n_; }
  Index t() const { return t_; }
  std::size_t size() const { return observed_.size(); }

  bool operator()(Index i, Index j, Index l) const { return observed_[offset(i, j, l)] != 0; }
  void set(Index i, Index j, Index l, bool value) { observed_[offset(i, j, l)] = value ? 1 : 0; }

  std::size_t count() const;
  bool matches(const Dims &d) const { return m_ == d.m && n_ == d.n && t_ == d.t; }

  /// Broadcast to an (m*n) x (c*t) 0/1 matrix using the DataMatrix layout.
  Matrix to_matrix(Index channels) const;

  friend bool operator==(const ObservationMask &, const ObservationMask &) = default;

 private:
  std::size_t offset(Index i, Index j, Index l) const {
    return static_cast<std::size_t>(i + m_ * (j + n_ * l));
  }

  Index m_ = 0;
  Index n_ = 0;
  Index t_ = 0;
  std::vector<std::uint8_t> observed_;
};

DataMatrix reshape_to_matrix(const ImageSequence &seq);
ImageSequence reshape_to_sequence(const DataMatrix &mat);

}  // namespace tecromac

#include "tecromac/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tecromac {

ImageSequence::ImageSequence(Dims dims, double fill) : dims_(dims) {
  if (!dims.valid()) throw DimensionError("image sequence dimensions must be positive");
  data_.assign(static_cast<std::size_t>(dims.size()), fill);
}

ImageSequence::ImageSequence(Dims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
  if (!dims.valid()) throw DimensionError("image sequence dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(dims.size()))
    throw DimensionError("image sequence data length " + std::to_string(data_.size()) +
                         " does not match dimensions");
}

bool ImageSequence::normalized() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; });
}

DataMatrix::DataMatrix(Matrix v, Dims d) : values(std::move(v)), dims(d) {
  if (!d.valid() || values.rows() != d.pixels() || values.cols() != d.columns())
    throw DimensionError("data matrix shape does not match its originating dimensions");
}

ObservationMask::ObservationMask(Index m, Index n, Index t, bool fill) : m_(m), n_(n), t_(t) {
  if (m <= 0 || n <= 0 || t <= 0) throw DimensionError("mask dimensions must be positive");
  observed_.assign(static_cast<std::size_t>(m * n * t), fill ? 1 : 0);
}

std::size_t ObservationMask::count() const {
  return static_cast<std::size_t>(std::count(observed_.begin(), observed_.end(), std::uint8_t{1}));
}

Matrix ObservationMask::to_matrix(Index channels) const {
  Matrix out(m_ * n_, channels * t_);
  for (Index k = 0; k < channels; ++k)
    for (Index l = 0; l < t_; ++l) {
      const Index v = l + k * t_;
      for (Index j = 0; j < n_; ++j)
        for (Index i = 0; i < m_; ++i) out(i + j * m_, v) = (*this)(i, j, l) ? 1.0 : 0.0;
    }
  return out;
}

DataMatrix reshape_to_matrix(const ImageSequence &seq) {
  const Dims &d = seq.dims();
  Matrix out(d.pixels(), d.columns());
  const double *src = seq.data().data();
  // Each (k, l) slab is one contiguous block of m*n values in tensor storage.
  for (Index l = 0; l < d.t; ++l)
    for (Index k = 0; k < d.c; ++k) {
      const double *slab = src + (k + d.c * l) * d.pixels();
      std::copy(slab, slab + d.pixels(), out.col(DataMatrix::column(d, k, l)).data());
    }
  return DataMatrix(std::move(out), d);
}

ImageSequence reshape_to_sequence(const DataMatrix &mat) {
  const Dims &d = mat.dims;
  if (!d.valid() || mat.values.rows() != d.pixels() || mat.values.cols() != d.columns())
    throw DimensionError("data matrix shape does not match its originating dimensions");
  std::vector<double> data(static_cast<std::size_t>(d.size()));
  for (Index l = 0; l < d.t; ++l)
    for (Index k = 0; k < d.c; ++k) {
      const double *col = mat.values.col(DataMatrix::column(d, k, l)).data();
      std::copy(col, col + d.pixels(), data.data() + (k + d.c * l) * d.pixels());
    }
  return ImageSequence(d, std::move(data));
}

}  // namespace tecromac

#include "sinr/point_set.hpp"

#include <algorithm>
#include <string>

#include "sinr/errors.hpp"

namespace sinr {

void PointSet::validate() const {
  if (values.cols() == 0) throw DimensionError("PointSet: no points");
  if (values.cols() != coords.cols()) {
    throw DimensionError("PointSet: " + std::to_string(values.cols()) + " value columns but " +
                         std::to_string(coords.cols()) + " coordinate columns");
  }
  if (grid && grid->height * grid->width != values.cols()) {
    throw DimensionError("PointSet: grid " + std::to_string(grid->height) + "x" +
                         std::to_string(grid->width) + " does not cover " +
                         std::to_string(values.cols()) + " points");
  }
}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Matrix Mask::as_matrix() const {
  Matrix m(rows_, cols_);
  auto d = m.data();
  for (std::size_t i = 0; i < bits_.size(); ++i) d[i] = bits_[i] ? 1.0 : 0.0;
  return m;
}

Mask Mask::gather_cols(const std::vector<std::size_t>& indices) const {
  Mask out(rows_, indices.size());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t j = 0; j < indices.size(); ++j) out.set(r, j, (*this)(r, indices[j]));
  return out;
}

Matrix normalize_coords(const Matrix& raw) {
  Matrix out = raw;
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    auto row = raw.row(r);
    if (row.empty()) continue;
    const auto [lo_it, hi_it] = std::minmax_element(row.begin(), row.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    auto dst = out.row(r);
    if (lo == -1.0 && hi == 1.0) continue;
    if (hi == lo) {
      std::fill(dst.begin(), dst.end(), 0.0);
      continue;
    }
    for (std::size_t c = 0; c < row.size(); ++c) dst[c] = 2.0 * (row[c] - lo) / (hi - lo) - 1.0;
  }
  return out;
}

Matrix grid_coords(std::size_t height, std::size_t width) {
  Matrix raw(2, height * width);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      raw(0, y * width + x) = static_cast<double>(y);
      raw(1, y * width + x) = static_cast<double>(x);
    }
  }
  return normalize_coords(raw);
}

}  // namespace sinr

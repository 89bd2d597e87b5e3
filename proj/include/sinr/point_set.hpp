#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "sinr/matrix.hpp"

namespace sinr {

/// Row-major image layout of a PointSet whose columns are pixels.
struct GridShape {
  std::size_t height = 0;
  std::size_t width = 0;
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

/// Point data: one column per point. `values` is features x n, `coords` is
/// coordinate-dims x n and is kept normalized to [-1, 1] per axis.
struct PointSet {
  Matrix values;
  Matrix coords;
  std::optional<GridShape> grid;

  std::size_t size() const noexcept { return values.cols(); }
  std::size_t value_dim() const noexcept { return values.rows(); }
  std::size_t coord_dim() const noexcept { return coords.rows(); }

  /// Throws DimensionError when the column counts disagree, n == 0, or the
  /// grid does not cover exactly n points.
  void validate() const;
};

/// Per-entry observation mask (features x points).
class Mask {
 public:
  Mask() = default;
  Mask(std::size_t rows, std::size_t cols, bool fill = false)
      : rows_(rows), cols_(cols), bits_(rows * cols, fill ? 1 : 0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool operator()(std::size_t r, std::size_t c) const noexcept { return bits_[r * cols_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool on) noexcept { bits_[r * cols_ + c] = on ? 1 : 0; }
  std::size_t count() const noexcept;

  /// 0/1 matrix of the same shape.
  Matrix as_matrix() const;
  Mask gather_cols(const std::vector<std::size_t>& indices) const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Maps each coordinate row affinely onto [-1, 1]. Constant rows map to 0;
/// rows already spanning exactly [-1, 1] are returned untouched so that
/// normalization is idempotent bit for bit.
Matrix normalize_coords(const Matrix& raw);

/// Normalized (row, column) coordinates of a height x width grid, row-major.
Matrix grid_coords(std::size_t height, std::size_t width);

}  // namespace sinr

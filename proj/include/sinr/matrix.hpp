#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sinr {

/// Dense row-major matrix of doubles.
///
/// Column vectors are plain `rows x 1` matrices; a PointSet stores one point
/// per column, so most network activations are `features x points`.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  /// Copies the listed columns, in order, into a new `rows x indices.size()` matrix.
  Matrix gather_cols(std::span<const std::size_t> indices) const;
  Matrix column(std::size_t c) const;

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix transpose(const Matrix& a);

/// a * b. Every output entry accumulates its inner products in ascending
/// index order, so results do not depend on blocking or threading.
Matrix matmul(const Matrix& a, const Matrix& b);
/// a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);

/// x + bias, where bias is either the same shape as x or a `x.rows() x 1`
/// column broadcast across every column of x.
Matrix add_bias(const Matrix& x, const Matrix& bias);
Matrix sine(const Matrix& x);
Matrix cosine(const Matrix& x);
Matrix relu(const Matrix& x);
Matrix sigmoid(const Matrix& x);
/// Hadamard product. `a` may also be a `b.rows() x 1` column, in which case
/// row r of b is scaled by a(r, 0) (channel-wise product).
Matrix elem_prod(const Matrix& a, const Matrix& b);
/// Mean over columns of each row: `rows x cols` -> `rows x 1`.
Matrix row_mean_pool(const Matrix& x);
Matrix scale(const Matrix& x, double factor);

/// In-place accumulate: acc += x (same shape).
void accumulate(Matrix& acc, const Matrix& x);

}  // namespace sinr

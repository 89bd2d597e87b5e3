#include "sinr/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sinr/errors.hpp"

namespace sinr {

namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

[[noreturn]] void shape_mismatch(const char* op, const Matrix& a, const Matrix& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " +
                       shape_str(b));
}

// Register-blocked product C += A B. A(i, k) is a[i * a_row + k * a_col], so
// the same kernel serves A and its transpose; B is row-major p x n and C is
// row-major m x n. Every entry accumulates over k in ascending order whatever
// the blocking, so results do not depend on the tile sizes.
constexpr std::size_t kMr = 4;
constexpr std::size_t kNr = 16;
constexpr std::size_t kKc = 256;

using Vec4 = double __attribute__((vector_size(32)));
using Vec4Unaligned = double __attribute__((vector_size(32), aligned(8), may_alias));
constexpr std::size_t kVecs = kNr / 4;

Vec4 load4(const double* p) { return *reinterpret_cast<const Vec4Unaligned*>(p); }

void store4(double* p, Vec4 v) { *reinterpret_cast<Vec4Unaligned*>(p) = v; }

struct GemmArgs {
  const double* a;
  std::size_t a_row;
  std::size_t a_col;
  const double* b;
  double* c;
  std::size_t n;
};

// c (kMr x kNr, row stride ldc) += A rows `arow` times `panel`, where panel
// holds B[k0:k1, j0:j0+kNr] packed with row stride kNr. Packing keeps large
// power-of-two row strides of B from thrashing a single cache set.
void gemm_tile(const double* const* arow, std::size_t a_col, const double* panel,
               std::size_t k0, std::size_t k1, double* c, std::size_t ldc) {
  Vec4 acc[kMr][kVecs];
#pragma GCC unroll 8
  for (std::size_t r = 0; r < kMr; ++r)
#pragma GCC unroll 8
    for (std::size_t v = 0; v < kVecs; ++v) acc[r][v] = load4(c + r * ldc + 4 * v);
  for (std::size_t k = k0; k < k1; ++k) {
    const double* brow = panel + (k - k0) * kNr;
    Vec4 bv[kVecs];
#pragma GCC unroll 8
    for (std::size_t v = 0; v < kVecs; ++v) bv[v] = load4(brow + 4 * v);
#pragma GCC unroll 8
    for (std::size_t r = 0; r < kMr; ++r) {
      const double av = arow[r][k * a_col];
#pragma GCC unroll 8
      for (std::size_t v = 0; v < kVecs; ++v) acc[r][v] += av * bv[v];
    }
  }
#pragma GCC unroll 8
  for (std::size_t r = 0; r < kMr; ++r)
#pragma GCC unroll 8
    for (std::size_t v = 0; v < kVecs; ++v) store4(c + r * ldc + 4 * v, acc[r][v]);
}

void gemm(const GemmArgs& g, std::size_t m, std::size_t p) {
  std::vector<double> panel(std::min(p, kKc) * kNr);
  double edge[kMr * kNr];
  const double* arow[kMr];
  for (std::size_t k0 = 0; k0 < p; k0 += kKc) {
    const std::size_t k1 = std::min(p, k0 + kKc);
    for (std::size_t j0 = 0; j0 < g.n; j0 += kNr) {
      const std::size_t nr = std::min(kNr, g.n - j0);
      for (std::size_t k = k0; k < k1; ++k)
        std::copy_n(g.b + k * g.n + j0, nr, panel.data() + (k - k0) * kNr);
      for (std::size_t i0 = 0; i0 < m; i0 += kMr) {
        const std::size_t mr = std::min(kMr, m - i0);
        // Edge tiles run on a padded copy: rows past the end repeat the last
        // row and columns past nr hold stale panel data, all discarded.
        for (std::size_t r = 0; r < kMr; ++r) arow[r] = g.a + (i0 + std::min(r, mr - 1)) * g.a_row;
        double* ctile = g.c + i0 * g.n + j0;
        if (mr == kMr && nr == kNr) {
          gemm_tile(arow, g.a_col, panel.data(), k0, k1, ctile, g.n);
          continue;
        }
        std::fill(std::begin(edge), std::end(edge), 0.0);
        for (std::size_t r = 0; r < mr; ++r) std::copy_n(ctile + r * g.n, nr, edge + r * kNr);
        gemm_tile(arow, g.a_col, panel.data(), k0, k1, edge, kNr);
        for (std::size_t r = 0; r < mr; ++r) std::copy_n(edge + r * kNr, nr, ctile + r * g.n);
      }
    }
  }
}

#if defined(SINR_HAVE_MVEC) && defined(__AVX2__)
extern "C" Vec4 _ZGVdN4v_sin(Vec4);
extern "C" Vec4 _ZGVdN4v_cos(Vec4);
constexpr Vec4 (*kSin)(Vec4) = _ZGVdN4v_sin;
constexpr Vec4 (*kCos)(Vec4) = _ZGVdN4v_cos;
#else
Vec4 scalar_sin4(Vec4 v) { return Vec4{std::sin(v[0]), std::sin(v[1]), std::sin(v[2]), std::sin(v[3])}; }
Vec4 scalar_cos4(Vec4 v) { return Vec4{std::cos(v[0]), std::cos(v[1]), std::cos(v[2]), std::cos(v[3])}; }
constexpr Vec4 (*kSin)(Vec4) = scalar_sin4;
constexpr Vec4 (*kCos)(Vec4) = scalar_cos4;
#endif

// Applies a 4-wide elementwise function; the tail goes through the same call
// on a padded copy, so a value never depends on its position in the matrix.
Matrix map4(const Matrix& x, Vec4 (*f)(Vec4)) {
  Matrix out(x.rows(), x.cols());
  const double* src = x.data().data();
  double* dst = out.data().data();
  const std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) store4(dst + i, f(load4(src + i)));
  if (i < n) {
    double tail[4] = {0.0, 0.0, 0.0, 0.0};
    std::copy(src + i, src + n, tail);
    const Vec4 r = f(load4(tail));
    for (std::size_t j = 0; i + j < n; ++j) dst[i + j] = r[j];
  }
  return out;
}

template <typename F>
Matrix map(const Matrix& x, F f) {
  Matrix out(x.rows(), x.cols());
  auto src = x.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix: " + std::to_string(data_.size()) +
                         " entries cannot fill " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::gather_cols(std::span<const std::size_t> indices) const {
  Matrix out(rows_, indices.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* src = data_.data() + r * cols_;
    double* dst = out.data_.data() + r * indices.size();
    for (std::size_t j = 0; j < indices.size(); ++j) dst[j] = src[indices[j]];
  }
  return out;
}

Matrix Matrix::column(std::size_t c) const {
  Matrix out(rows_, 1);
  for (std::size_t r = 0; r < rows_; ++r) out(r, 0) = (*this)(r, c);
  return out;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix transpose(const Matrix& a) {
  constexpr std::size_t kTile = 32;
  Matrix t(a.cols(), a.rows());
  for (std::size_t r0 = 0; r0 < a.rows(); r0 += kTile)
    for (std::size_t c0 = 0; c0 < a.cols(); c0 += kTile) {
      const std::size_t r1 = std::min(a.rows(), r0 + kTile);
      const std::size_t c1 = std::min(a.cols(), c0 + kTile);
      for (std::size_t r = r0; r < r1; ++r)
        for (std::size_t c = c0; c < c1; ++c) t(c, r) = a(r, c);
    }
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) shape_mismatch("matmul", a, b);
  Matrix c(a.rows(), b.cols());
  gemm({a.data().data(), a.cols(), 1, b.data().data(), c.data().data(), b.cols()}, a.rows(),
       a.cols());
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) shape_mismatch("matmul_nt", a, b);
  const Matrix bt = transpose(b);
  Matrix c(a.rows(), b.rows());
  gemm({a.data().data(), a.cols(), 1, bt.data().data(), c.data().data(), b.rows()}, a.rows(),
       a.cols());
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) shape_mismatch("matmul_tn", a, b);
  Matrix c(a.cols(), b.cols());
  gemm({a.data().data(), 1, a.cols(), b.data().data(), c.data().data(), b.cols()}, a.cols(),
       a.rows());
  return c;
}

Matrix add_bias(const Matrix& x, const Matrix& bias) {
  if (x.same_shape(bias)) {
    Matrix out = x;
    accumulate(out, bias);
    return out;
  }
  if (bias.cols() != 1 || bias.rows() != x.rows()) shape_mismatch("add_bias", x, bias);
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double b = bias(r, 0);
    auto src = x.row(r);
    auto dst = out.row(r);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] = src[c] + b;
  }
  return out;
}

Matrix sine(const Matrix& x) { return map4(x, kSin); }

Matrix cosine(const Matrix& x) { return map4(x, kCos); }

Matrix relu(const Matrix& x) {
  return map(x, [](double v) { return v > 0.0 ? v : 0.0; });
}

Matrix sigmoid(const Matrix& x) {
  return map(x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Matrix elem_prod(const Matrix& a, const Matrix& b) {
  if (a.same_shape(b)) {
    Matrix out(a.rows(), a.cols());
    auto ad = a.data();
    auto bd = b.data();
    auto od = out.data();
    for (std::size_t i = 0; i < od.size(); ++i) od[i] = ad[i] * bd[i];
    return out;
  }
  if (a.cols() != 1 || a.rows() != b.rows()) shape_mismatch("elem_prod", a, b);
  Matrix out(b.rows(), b.cols());
  for (std::size_t r = 0; r < b.rows(); ++r) {
    const double g = a(r, 0);
    auto src = b.row(r);
    auto dst = out.row(r);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] = g * src[c];
  }
  return out;
}

Matrix row_mean_pool(const Matrix& x) {
  if (x.cols() == 0) throw DimensionError("row_mean_pool: input has no columns");
  Matrix out(x.rows(), 1);
  const double count = static_cast<double>(x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double sum = 0.0;
    for (double v : x.row(r)) sum += v;
    out(r, 0) = sum / count;
  }
  return out;
}

Matrix scale(const Matrix& x, double factor) {
  return map(x, [factor](double v) { return factor * v; });
}

void accumulate(Matrix& acc, const Matrix& x) {
  if (!acc.same_shape(x)) shape_mismatch("accumulate", acc, x);
  auto ad = acc.data();
  auto xd = x.data();
  for (std::size_t i = 0; i < ad.size(); ++i) ad[i] += xd[i];
}

}  // namespace sinr

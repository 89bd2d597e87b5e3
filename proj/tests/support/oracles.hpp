#pragma once

// Straight-line reference implementations used by the unit and acceptance
// tests. They share no code with the library beyond the Matrix container and
// are written for clarity, not speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "sinr/gssa.hpp"
#include "sinr/matrix.hpp"
#include "sinr/model.hpp"
#include "sinr/point_set.hpp"
#include "sinr/random.hpp"

namespace oracle {

using sinr::Matrix;

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  return out;
}

inline Matrix random_matrix(sinr::Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

using Points = std::vector<std::vector<long double>>;

// Channel gate applied to every point: sigmoid(U relu(V mean_p z_p)) * z_p.
// `relu_margin`, when given, is lowered to the smallest |ReLU input| seen.
inline Points gate_points(const Matrix& excite, const Matrix& squeeze, const Points& z,
                          long double* relu_margin = nullptr) {
  const std::size_t m = z.size();
  const std::size_t ch = z.front().size();
  std::vector<long double> pooled(ch, 0.0L);
  for (std::size_t c = 0; c < ch; ++c) {
    long double sum = 0.0L;
    for (std::size_t p = 0; p < m; ++p) sum += z[p][c];
    pooled[c] = sum / static_cast<long double>(m);
  }
  std::vector<long double> hidden(ch, 0.0L);
  for (std::size_t i = 0; i < ch; ++i) {
    long double acc = 0.0L;
    for (std::size_t j = 0; j < ch; ++j) acc += squeeze(i, j) * pooled[j];
    hidden[i] = acc > 0.0L ? acc : 0.0L;
    if (relu_margin) *relu_margin = std::min(*relu_margin, std::abs(acc));
  }
  std::vector<long double> gate(ch, 0.0L);
  for (std::size_t i = 0; i < ch; ++i) {
    long double acc = 0.0L;
    for (std::size_t j = 0; j < ch; ++j) acc += excite(i, j) * hidden[j];
    gate[i] = 1.0L / (1.0L + std::exp(-acc));
  }
  Points out = z;
  for (auto& point : out)
    for (std::size_t c = 0; c < ch; ++c) point[c] *= gate[c];
  return out;
}

inline Points to_points(const Matrix& z) {
  Points pts(z.cols(), std::vector<long double>(z.rows()));
  for (std::size_t p = 0; p < z.cols(); ++p)
    for (std::size_t c = 0; c < z.rows(); ++c) pts[p][c] = z(c, p);
  return pts;
}

inline Matrix to_matrix(const Points& pts) {
  Matrix out(pts.front().size(), pts.size());
  for (std::size_t p = 0; p < pts.size(); ++p)
    for (std::size_t c = 0; c < pts[p].size(); ++c) out(c, p) = static_cast<double>(pts[p][c]);
  return out;
}

inline Matrix attention(const Matrix& excite, const Matrix& squeeze, const Matrix& z) {
  return to_matrix(gate_points(excite, squeeze, to_points(z)));
}

// Unrolled S-INR forward of one superpixel network, point by point in
// extended precision: sine layers on omega0 * (W z + b), affine last layer,
// optional gate after every layer and optional dictionary product.
inline Points sinr_forward_points(const sinr::SInrModel& model, std::size_t k, const Matrix& x,
                                  long double* relu_margin = nullptr) {
  const auto& net = model.nets[k];
  Points z = to_points(x);
  const long double omega0 = model.arch.omega0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const bool last = l + 1 == net.layers.size();
    for (auto& point : z) {
      std::vector<long double> next(layer.weight.rows());
      for (std::size_t i = 0; i < layer.weight.rows(); ++i) {
        long double acc = 0.0L;
        for (std::size_t j = 0; j < layer.weight.cols(); ++j) acc += layer.weight(i, j) * point[j];
        acc += layer.bias(i, 0);
        next[i] = last ? acc : std::sin(omega0 * acc);
      }
      point = std::move(next);
    }
    if (model.arch.attention) z = gate_points(layer.excite, layer.squeeze, z, relu_margin);
  }
  if (!model.arch.dictionary) return z;
  const Matrix& d = model.dictionary;
  for (auto& point : z) {
    std::vector<long double> out(d.rows(), 0.0L);
    for (std::size_t i = 0; i < d.rows(); ++i)
      for (std::size_t j = 0; j < d.cols(); ++j) out[i] += d(i, j) * point[j];
    point = std::move(out);
  }
  return z;
}

inline Matrix sinr_forward(const sinr::SInrModel& model, std::size_t k, const Matrix& x) {
  return to_matrix(sinr_forward_points(model, k, x));
}

// Smallest |ReLU input| over every gate of every superpixel network.
inline long double relu_margin(const sinr::SInrModel& model, const sinr::SuperpixelPartition& part,
                               const sinr::PointSet& observed) {
  long double margin = std::numeric_limits<long double>::infinity();
  for (std::size_t k = 0; k < part.members.size(); ++k) {
    const auto& idx = part.members[k];
    Matrix x(observed.coord_dim(), idx.size());
    for (std::size_t p = 0; p < idx.size(); ++p)
      for (std::size_t r = 0; r < x.rows(); ++r) x(r, p) = observed.coords(r, idx[p]);
    sinr_forward_points(model, k, x, &margin);
  }
  return margin;
}

// Sum over superpixels and their points of squared (optionally masked)
// residuals, accumulated in extended precision.
inline long double recovery_loss_ext(const sinr::SInrModel& model,
                                     const sinr::SuperpixelPartition& part,
                                     const sinr::PointSet& observed,
                                     const std::optional<Matrix>& mask) {
  long double total = 0.0L;
  for (std::size_t k = 0; k < part.members.size(); ++k) {
    const auto& idx = part.members[k];
    Matrix x(observed.coord_dim(), idx.size());
    for (std::size_t p = 0; p < idx.size(); ++p)
      for (std::size_t r = 0; r < x.rows(); ++r) x(r, p) = observed.coords(r, idx[p]);
    const Points pred = sinr_forward_points(model, k, x);
    for (std::size_t p = 0; p < idx.size(); ++p)
      for (std::size_t s = 0; s < pred[p].size(); ++s) {
        if (mask && (*mask)(s, idx[p]) == 0.0) continue;
        const long double d = pred[p][s] - observed.values(s, idx[p]);
        total += d * d;
      }
  }
  return total;
}

inline double recovery_loss(const sinr::SInrModel& model, const sinr::SuperpixelPartition& part,
                            const sinr::PointSet& observed, const std::optional<Matrix>& mask) {
  return static_cast<double>(recovery_loss_ext(model, part, observed, mask));
}

// Central finite difference of f with respect to every entry of `param`.
inline Matrix finite_difference(Matrix& param, const std::function<long double()>& f,
                                double h = 1e-6) {
  Matrix grad(param.rows(), param.cols());
  for (std::size_t i = 0; i < param.size(); ++i) {
    double& v = param.data()[i];
    const double saved = v;
    v = saved + h;
    const long double up = f();
    v = saved - h;
    const long double down = f();
    v = saved;
    // the actual step, which differs from h by the rounding of saved +/- h
    const long double step = static_cast<long double>(saved + h) - static_cast<long double>(saved - h);
    grad.data()[i] = static_cast<double>((up - down) / step);
  }
  return grad;
}

// Gradient-check relative error with an absolute floor on the denominator:
// entries whose true gradient is ~0 are judged on absolute error instead.
inline double relative_error(double analytic, double numeric, double floor = 1e-4) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline double psnr(const Matrix& a, const Matrix& b) {
  double sum = 0.0;
  for (std::size_t band = 0; band < a.rows(); ++band) {
    double mse = 0.0;
    for (std::size_t i = 0; i < a.cols(); ++i) mse += (a(band, i) - b(band, i)) * (a(band, i) - b(band, i));
    mse /= static_cast<double>(a.cols());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    sum += -10.0 * std::log10(mse);
  }
  return sum / static_cast<double>(a.rows());
}

// Direct 2-D windowed SSIM: for every valid window, weighted moments from an
// explicit 11x11 Gaussian kernel.
inline double ssim(const Matrix& a, const Matrix& b, std::size_t h, std::size_t w) {
  const int win = 11;
  const double sigma = 1.5;
  double kernel[11][11];
  double total = 0.0;
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) {
      const double di = i - 5, dj = j - 5;
      kernel[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
      total += kernel[i][j];
    }
  for (auto& row : kernel)
    for (double& v : row) v /= total;
  const double c1 = 1e-4, c2 = 9e-4;
  double band_mean = 0.0;
  for (std::size_t band = 0; band < a.rows(); ++band) {
    double acc = 0.0;
    std::size_t windows = 0;
    for (std::size_t y = 0; y + win <= h; ++y)
      for (std::size_t x = 0; x + win <= w; ++x) {
        double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
        for (int i = 0; i < win; ++i)
          for (int j = 0; j < win; ++j) {
            const std::size_t p = (y + i) * w + x + j;
            const double g = kernel[i][j];
            mx += g * a(band, p);
            my += g * b(band, p);
          }
        for (int i = 0; i < win; ++i)
          for (int j = 0; j < win; ++j) {
            const std::size_t p = (y + i) * w + x + j;
            const double g = kernel[i][j];
            sxx += g * (a(band, p) - mx) * (a(band, p) - mx);
            syy += g * (b(band, p) - my) * (b(band, p) - my);
            sxy += g * (a(band, p) - mx) * (b(band, p) - my);
          }
        acc += (2 * mx * my + c1) * (2 * sxy + c2) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
        ++windows;
      }
    band_mean += acc / static_cast<double>(windows);
  }
  return band_mean / static_cast<double>(a.rows());
}

inline double nrmse(const Matrix& pred, const Matrix& truth) {
  double sum = 0.0;
  for (std::size_t r = 0; r < truth.rows(); ++r) {
    double lo = truth(r, 0), hi = truth(r, 0), sse = 0.0;
    for (std::size_t i = 0; i < truth.cols(); ++i) {
      lo = std::min(lo, truth(r, i));
      hi = std::max(hi, truth(r, i));
      sse += (pred(r, i) - truth(r, i)) * (pred(r, i) - truth(r, i));
    }
    sum += std::sqrt(sse / static_cast<double>(truth.cols())) / (hi - lo);
  }
  return sum / static_cast<double>(truth.rows());
}

inline double r_square(const Matrix& pred, const Matrix& truth) {
  double mean = 0.0;
  for (std::size_t r = 0; r < truth.rows(); ++r)
    for (std::size_t i = 0; i < truth.cols(); ++i) mean += truth(r, i);
  mean /= static_cast<double>(truth.size());
  double res = 0.0, tot = 0.0;
  for (std::size_t r = 0; r < truth.rows(); ++r)
    for (std::size_t i = 0; i < truth.cols(); ++i) {
      res += (truth(r, i) - pred(r, i)) * (truth(r, i) - pred(r, i));
      tot += (truth(r, i) - mean) * (truth(r, i) - mean);
    }
  return 1.0 - res / tot;
}

// Lloyd's k-means on values only, started from the given point indices.
// Emptied clusters restart at the worst-fit point, as in the library.
inline std::vector<std::uint32_t> plain_kmeans(const Matrix& values,
                                               const std::vector<std::size_t>& seeds,
                                               std::size_t max_iterations = 100) {
  const std::size_t n = values.cols(), s = values.rows(), k = seeds.size();
  std::vector<std::vector<double>> centers(k, std::vector<double>(s));
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t r = 0; r < s; ++r) centers[j][r] = values(r, seeds[j]);
  auto dist = [&](std::size_t i, std::size_t j) {
    double d = 0.0;
    for (std::size_t r = 0; r < s; ++r) d += (values(r, i) - centers[j][r]) * (values(r, i) - centers[j][r]);
    return d;
  };
  std::vector<std::uint32_t> labels(n, std::numeric_limits<std::uint32_t>::max());
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t best = 0;
      for (std::size_t j = 1; j < k; ++j)
        if (dist(i, j) < dist(i, best)) best = static_cast<std::uint32_t>(j);
      changed |= labels[i] != best;
      labels[i] = best;
    }
    if (!changed) break;
    std::vector<std::vector<double>> sums(k, std::vector<double>(s, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[labels[i]];
      for (std::size_t r = 0; r < s; ++r) sums[labels[i]][r] += values(r, i);
    }
    for (std::size_t j = 0; j < k; ++j)
      if (counts[j] > 0)
        for (std::size_t r = 0; r < s; ++r) centers[j][r] = sums[j][r] / static_cast<double>(counts[j]);
    std::vector<bool> used(n, false);
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] > 0) continue;
      std::size_t worst = 0;
      double worst_d = -1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (!used[i] && dist(i, labels[i]) > worst_d) {
          worst_d = dist(i, labels[i]);
          worst = i;
        }
      used[worst] = true;
      for (std::size_t r = 0; r < s; ++r) centers[j][r] = values(r, worst);
    }
  }
  return labels;
}

// Connected pieces per label on a 4-connected grid, by iterative flood fill.
inline std::vector<std::size_t> flood_fill_components(const std::vector<std::uint32_t>& labels,
                                                      std::size_t k, std::size_t h,
                                                      std::size_t w) {
  std::vector<std::size_t> components(k, 0);
  std::vector<bool> seen(labels.size(), false);
  for (std::size_t start = 0; start < labels.size(); ++start) {
    if (seen[start]) continue;
    ++components[labels[start]];
    std::vector<std::size_t> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t y = p / w, x = p % w;
      const std::size_t nbrs[4] = {y > 0 ? p - w : p, y + 1 < h ? p + w : p,
                                   x > 0 ? p - 1 : p, x + 1 < w ? p + 1 : p};
      for (std::size_t q : nbrs)
        if (!seen[q] && labels[q] == labels[p]) {
          seen[q] = true;
          stack.push_back(q);
        }
    }
  }
  return components;
}

}  // namespace oracle

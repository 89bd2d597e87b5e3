#pragma once

#include <optional>

#include "sinr/matrix.hpp"
#include "sinr/point_set.hpp"

namespace sinr {

/// Mean over rows (bands) of 10 log10(1 / MSE) with peak 1. Identical bands
/// score +infinity.
double psnr(const Matrix& a, const Matrix& b);

/// Gaussian-window SSIM (11x11, sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic
/// range 1), averaged over valid window positions and then over bands.
/// Columns are pixels laid out row-major in `grid`.
double ssim(const Matrix& a, const Matrix& b, GridShape grid);

/// Per-row RMSE divided by the row's range in `truth`, averaged over rows.
double nrmse(const Matrix& pred, const Matrix& truth);

/// 1 - SS_res / SS_tot over all entries.
double r_square(const Matrix& pred, const Matrix& truth);

struct MetricReport {
  std::optional<double> psnr;
  std::optional<double> ssim;
  std::optional<double> nrmse;
  std::optional<double> r_square;
};

/// Every metric that is defined for this pair: SSIM needs a grid of at least
/// 11x11, NRMSE a non-constant truth row range, R-Square a non-constant truth.
MetricReport evaluate_metrics(const Matrix& pred, const Matrix& truth,
                              std::optional<GridShape> grid);

}  // namespace sinr

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "sinr/errors.hpp"
#include "sinr/metrics.hpp"
#include "sinr/random.hpp"
#include "support/oracles.hpp"

namespace sinr {
namespace {

TEST(Psnr, IdenticalIsInfinite) {
  Rng rng(1);
  const Matrix a = oracle::random_matrix(rng, 3, 40, 0.0, 1.0);
  EXPECT_EQ(psnr(a, a), std::numeric_limits<double>::infinity());
}

TEST(Psnr, ConstantHalfOffset) {
  const Matrix a(2, 10, 0.25);
  const Matrix b(2, 10, 0.75);
  EXPECT_DOUBLE_EQ(psnr(a, b), 10.0 * std::log10(4.0));
  EXPECT_NEAR(psnr(a, b), 6.0206, 5e-5);
}

TEST(Psnr, SymmetricAndDecreasingInNoise) {
  Rng rng(2);
  const Matrix clean = oracle::random_matrix(rng, 3, 400, 0.0, 1.0);
  double previous = std::numeric_limits<double>::infinity();
  for (double sigma : {0.05, 0.1, 0.15, 0.2}) {
    double mean = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      Matrix noisy = clean;
      for (double& v : noisy.data()) v += sigma * rng.normal();
      EXPECT_EQ(psnr(noisy, clean), psnr(clean, noisy));
      mean += psnr(noisy, clean) / 10.0;
    }
    EXPECT_LT(mean, previous);
    previous = mean;
  }
}

TEST(Ssim, IdenticalIsOne) {
  Rng rng(3);
  const Matrix a = oracle::random_matrix(rng, 3, 20 * 16, 0.0, 1.0);
  EXPECT_NEAR(ssim(a, a, {20, 16}), 1.0, 1e-12);
}

TEST(Ssim, InvertedContrastIsNegative) {
  Matrix a(1, 24 * 24);
  for (std::size_t y = 0; y < 24; ++y)
    for (std::size_t x = 0; x < 24; ++x) a(0, y * 24 + x) = ((x / 2 + y / 2) % 2) ? 1.0 : 0.0;
  Matrix b = a;
  for (double& v : b.data()) v = 1.0 - v;
  EXPECT_LT(ssim(a, b, {24, 24}), 0.0);
}

TEST(Ssim, SymmetricAndMatchesScalarOracle) {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t h = 11 + rng.index(10), w = 11 + rng.index(10);
    const Matrix a = oracle::random_matrix(rng, 2, h * w, 0.0, 1.0);
    Matrix b = a;
    for (double& v : b.data()) v += 0.2 * rng.normal();
    EXPECT_NEAR(ssim(a, b, {h, w}), oracle::ssim(a, b, h, w), 1e-9);
    EXPECT_NEAR(ssim(a, b, {h, w}), ssim(b, a, {h, w}), 1e-12);
  }
}

TEST(Ssim, RejectsSmallImages) {
  const Matrix a(1, 10 * 30, 0.5);
  EXPECT_THROW(ssim(a, a, {10, 30}), InvalidArgument);
  EXPECT_THROW(ssim(a, a, {20, 20}), DimensionError);
}

TEST(Nrmse, ExactAndOracle) {
  Rng rng(5);
  const Matrix truth = oracle::random_matrix(rng, 3, 50);
  EXPECT_EQ(nrmse(truth, truth), 0.0);
  const Matrix pred = oracle::random_matrix(rng, 3, 50);
  EXPECT_NEAR(nrmse(pred, truth), oracle::nrmse(pred, truth), 1e-12);
  EXPECT_THROW(nrmse(pred, Matrix(3, 50, 1.0)), InvalidArgument);
}

TEST(RSquare, ExactAndOracle) {
  Rng rng(6);
  const Matrix truth = oracle::random_matrix(rng, 2, 60);
  EXPECT_EQ(r_square(truth, truth), 1.0);
  double mean = 0.0;
  for (double v : truth.data()) mean += v;
  mean /= static_cast<double>(truth.size());
  EXPECT_NEAR(r_square(Matrix(2, 60, mean), truth), 0.0, 1e-15);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix pred = oracle::random_matrix(rng, 2, 60, -3.0, 3.0);
    EXPECT_NEAR(r_square(pred, truth), oracle::r_square(pred, truth), 1e-12);
    EXPECT_LE(r_square(pred, truth), 1.0);
  }
  EXPECT_THROW(r_square(truth, Matrix(2, 60, 0.3)), InvalidArgument);
}

TEST(Metrics, ShapeMismatch) {
  EXPECT_THROW(psnr(Matrix(1, 3), Matrix(1, 4)), DimensionError);
  EXPECT_THROW(nrmse(Matrix(2, 3), Matrix(1, 3)), DimensionError);
}

TEST(Metrics, ReportSkipsUndefinedEntries) {
  Rng rng(7);
  const Matrix truth = oracle::random_matrix(rng, 3, 25, 0.0, 1.0);
  const MetricReport small = evaluate_metrics(truth, truth, GridShape{5, 5});
  EXPECT_TRUE(small.psnr.has_value());
  EXPECT_FALSE(small.ssim.has_value());
  const MetricReport flat = evaluate_metrics(truth, Matrix(3, 25, 0.5), std::nullopt);
  EXPECT_FALSE(flat.r_square.has_value());
  EXPECT_FALSE(flat.nrmse.has_value());
}

}  // namespace
}  // namespace sinr

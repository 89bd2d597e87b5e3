#include <gtest/gtest.h>

#include <numeric>

#include "sinr/errors.hpp"
#include "sinr/gssa.hpp"
#include "sinr/random.hpp"
#include "support/oracles.hpp"

namespace sinr {
namespace {

PointSet random_points(Rng& rng, std::size_t n, std::size_t s, std::size_t c) {
  PointSet data;
  data.values = oracle::random_matrix(rng, s, n, 0.0, 1.0);
  data.coords = normalize_coords(oracle::random_matrix(rng, c, n));
  return data;
}

PointSet random_image(Rng& rng, std::size_t h, std::size_t w) {
  PointSet data;
  data.values = Matrix(3, h * w);
  // a few flat blobs plus noise so segments follow structure
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t b = 0; b < 3; ++b)
        data.values(b, y * w + x) = ((x / 6 + y / 5 + b) % 3) * 0.4 + 0.05 * rng.uniform();
  data.coords = grid_coords(h, w);
  data.grid = GridShape{h, w};
  return data;
}

TEST(Gssa, SingleSuperpixelIsGlobalMean) {
  Rng rng(1);
  const PointSet data = random_points(rng, 57, 3, 2);
  const auto part = gssa_segment(data, 1, 5.0, 9);
  ASSERT_EQ(part.superpixel_count(), 1u);
  EXPECT_EQ(part.members[0].size(), 57u);
  for (std::size_t r = 0; r < 3; ++r) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 57; ++i) mean += data.values(r, i);
    EXPECT_NEAR(part.value_centroids(r, 0), mean / 57.0, 1e-14);
  }
  for (std::size_t r = 0; r < 2; ++r) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 57; ++i) mean += data.coords(r, i);
    EXPECT_NEAR(part.coord_centroids(r, 0), mean / 57.0, 1e-14);
  }
}

TEST(Gssa, AssignmentUsesCombinedDistance) {
  // centers (value 0 at x=0) and (value 10 at x=1); point (4 at x=0), alpha 1:
  // d0 = 16, d1 = 36 + 1 = 37
  PointSet data;
  data.values = Matrix{{0.0, 10.0, 4.0}};
  data.coords = Matrix{{0.0, 1.0, 0.0}};
  auto part = partition_from_labels(data, {0, 1, 0}, 2);
  part.value_centroids = Matrix{{0.0, 10.0}};
  part.coord_centroids = Matrix{{0.0, 1.0}};
  part.labels = {0, 1, 0};
  EXPECT_DOUBLE_EQ(gssa_objective(data, part, 1.0), 16.0);
  part.labels = {0, 1, 1};
  EXPECT_DOUBLE_EQ(gssa_objective(data, part, 1.0), 37.0);
}

TEST(Gssa, ObjectiveHandCases) {
  PointSet data;
  data.values = Matrix{{0.0, 10.0}};
  data.coords = Matrix{{0.0, 1.0}};
  EXPECT_DOUBLE_EQ(gssa_objective(data, gssa_segment(data, 1, 0.0, 3), 0.0), 50.0);
  EXPECT_EQ(gssa_objective(data, gssa_segment(data, 2, 0.0, 3), 0.0), 0.0);

  PointSet flat;
  flat.values = Matrix{{0.0, 1.0, 5.0}};
  flat.coords = Matrix(1, 3, 0.25);
  const auto part = partition_from_labels(flat, {0, 0, 1}, 2);
  EXPECT_EQ(gssa_objective(flat, part, 2.0), gssa_objective(flat, part, 4.0));
}

TEST(Gssa, ObjectiveRejectsOutOfRangeLabel) {
  PointSet data;
  data.values = Matrix{{0.0, 1.0}};
  data.coords = Matrix{{-1.0, 1.0}};
  auto part = partition_from_labels(data, {0, 1}, 2);
  part.labels[1] = 7;
  EXPECT_THROW(gssa_objective(data, part, 1.0), ContractError);
}

TEST(Gssa, RejectsTooManySuperpixels) {
  Rng rng(2);
  const PointSet data = random_points(rng, 5, 1, 1);
  EXPECT_THROW(gssa_segment(data, 6, 1.0, 0), InvalidArgument);
  EXPECT_THROW(gssa_segment(data, 0, 1.0, 0), InvalidArgument);
  EXPECT_THROW(gssa_segment(data, 2, -1.0, 0), InvalidArgument);
}

TEST(Gssa, IdenticalPointsStillGiveNonEmptySuperpixels) {
  PointSet data;
  data.values = Matrix(2, 12, 0.5);
  data.coords = Matrix(2, 12, 0.0);
  const auto part = gssa_segment(data, 4, 20.0, 5);
  for (const auto& m : part.members) EXPECT_FALSE(m.empty());
  EXPECT_EQ(gssa_objective(data, part, 20.0), 0.0);
}

TEST(Gssa, PartitionIsTotalAndObjectiveMonotone) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + rng.index(200);
    const std::size_t k = 1 + rng.index(std::min<std::size_t>(n, 30));
    const double alpha = rng.uniform(0.0, 20.0);
    const PointSet data = random_points(rng, n, 1 + rng.index(4), 1 + rng.index(3));
    std::vector<double> objective;
    GssaOptions opts;
    opts.observer = [&](std::size_t, const std::vector<std::uint32_t>& labels, const Matrix& vc,
                        const Matrix& cc) {
      SuperpixelPartition p;
      p.labels = labels;
      p.value_centroids = vc;
      p.coord_centroids = cc;
      objective.push_back(gssa_objective(data, p, alpha));
    };
    const auto part = gssa_segment(data, k, alpha, rng.index(1000), opts);
    ASSERT_EQ(part.labels.size(), n);
    std::vector<std::size_t> histogram(k, 0);
    for (auto l : part.labels) {
      ASSERT_LT(l, k);
      ++histogram[l];
    }
    EXPECT_EQ(std::accumulate(histogram.begin(), histogram.end(), std::size_t{0}), n);
    std::size_t member_total = 0;
    for (std::size_t j = 0; j < k; ++j) {
      EXPECT_EQ(part.members[j].size(), histogram[j]);
      EXPECT_GT(histogram[j], 0u);
      member_total += part.members[j].size();
    }
    EXPECT_EQ(member_total, n);
    for (std::size_t t = 1; t < objective.size(); ++t) EXPECT_LE(objective[t], objective[t - 1] + 1e-12);
  }
}

TEST(Gssa, ZeroAlphaIsPlainKMeans) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const PointSet data = random_points(rng, 150, 3, 2);
    const std::size_t k = 2 + rng.index(10);
    const std::uint64_t seed = rng.index(1u << 20);
    const auto seeds = kmeanspp_seeds(data, k, 0.0, seed);
    EXPECT_EQ(gssa_segment(data, k, 0.0, seed).labels, oracle::plain_kmeans(data.values, seeds));
  }
}

TEST(Gssa, SameSeedSamePartition) {
  Rng rng(12);
  const PointSet data = random_points(rng, 300, 3, 2);
  const auto a = gssa_segment(data, 12, 5.0, 42);
  const auto b = gssa_segment(data, 12, 5.0, 42);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.value_centroids, b.value_centroids);
}

TEST(Connectivity, HandCases) {
  PointSet data;
  data.values = Matrix{{0.0, 0.0, 1.0}};
  data.coords = grid_coords(1, 3);
  auto single = partition_from_labels(data, {0, 0, 1}, 2);
  auto report = connectivity_report(single, data.coords, GridShape{1, 3});
  EXPECT_EQ(report.components, (std::vector<std::size_t>{1, 1}));

  auto split = partition_from_labels(data, {0, 1, 0}, 2);
  report = connectivity_report(split, data.coords, GridShape{1, 3});
  EXPECT_EQ(report.components, (std::vector<std::size_t>{2, 1}));
  EXPECT_EQ(report.disconnected_superpixels(), 1u);
}

TEST(Connectivity, MatchesFloodFill) {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const PointSet data = random_image(rng, 24, 30);
    const auto part = gssa_segment(data, 15, 20.0, trial);
    const auto report = connectivity_report(part, data.coords, data.grid);
    EXPECT_EQ(report.components, oracle::flood_fill_components(part.labels, 15, 24, 30));
  }
}

TEST(Connectivity, ScatteredPointsUseNeighborGraph) {
  PointSet data;
  data.values = Matrix(1, 4, 0.0);
  data.coords = Matrix{{-1.0, -0.9, 0.9, 1.0}};
  const auto part = partition_from_labels(data, {0, 0, 0, 1}, 2);
  EXPECT_EQ(connectivity_report(part, data.coords, std::nullopt, 1).components,
            (std::vector<std::size_t>{2, 1}));
}

}  // namespace
}  // namespace sinr

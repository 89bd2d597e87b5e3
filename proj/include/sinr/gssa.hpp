#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "sinr/matrix.hpp"
#include "sinr/point_set.hpp"

namespace sinr {

/// Assignment of every point to exactly one of K generalized superpixels.
struct SuperpixelPartition {
  std::vector<std::uint32_t> labels;               ///< length n, values in [0, K)
  Matrix value_centroids;                          ///< s x K
  Matrix coord_centroids;                          ///< c x K
  std::vector<std::vector<std::size_t>> members;   ///< ascending point indices per superpixel
  std::size_t iterations = 0;

  std::size_t superpixel_count() const noexcept { return members.size(); }
  std::size_t point_count() const noexcept { return labels.size(); }
};

/// Called after every assignment + centroid update round with the current
/// labels and centroids.
using GssaObserver = std::function<void(std::size_t iteration,
                                        const std::vector<std::uint32_t>& labels,
                                        const Matrix& value_centroids,
                                        const Matrix& coord_centroids)>;

struct GssaOptions {
  std::size_t max_iterations = 100;
  GssaObserver observer;
};

/// Indices of the K initial centers chosen by k-means++ D^2 sampling under
/// the combined distance ||o_i - mu||^2 + alpha ||x_i - x_mu||^2.
std::vector<std::size_t> kmeanspp_seeds(const PointSet& data, std::size_t k, double alpha,
                                        std::uint64_t seed);

/// Coordinate-weighted k-means segmentation into K generalized superpixels.
///
/// Alternates nearest-center assignment (lowest index wins ties) and
/// centroid means until the labels stop changing or `max_iterations` rounds
/// have run. Emptied clusters are reseeded at the worst-fit point so the
/// returned partition never has an empty superpixel.
SuperpixelPartition gssa_segment(const PointSet& data, std::size_t k, double alpha,
                                 std::uint64_t seed, const GssaOptions& options = {});

/// Sum over points of the combined distance to their own superpixel's centroid.
double gssa_objective(const PointSet& data, const SuperpixelPartition& part, double alpha);

/// Rebuilds member lists and centroids from a label vector.
SuperpixelPartition partition_from_labels(const PointSet& data,
                                          std::vector<std::uint32_t> labels, std::size_t k);

struct ConnectivityReport {
  std::vector<std::size_t> components;  ///< connected components per superpixel
  std::size_t neighbors = 0;            ///< 4 on grids, k of the k-NN graph otherwise

  std::size_t disconnected_superpixels() const;
};

/// Counts spatially connected pieces of every superpixel. Grid data uses
/// 4-connectivity; scattered points use a symmetric k-nearest-neighbor graph.
ConnectivityReport connectivity_report(const SuperpixelPartition& part, const Matrix& coords,
                                       std::optional<GridShape> grid,
                                       std::size_t knn = 6);

}  // namespace sinr

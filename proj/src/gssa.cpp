#include "sinr/gssa.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "sinr/errors.hpp"
#include "sinr/random.hpp"

namespace sinr {

namespace {

constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();

double sq_dist_to_column(const Matrix& points, std::size_t i, const Matrix& centers,
                         std::size_t k) {
  double d = 0.0;
  for (std::size_t r = 0; r < points.rows(); ++r) {
    const double diff = points(r, i) - centers(r, k);
    d += diff * diff;
  }
  return d;
}

// Combined GSSA distance between point i and center k.
double combined_dist(const PointSet& data, std::size_t i, const Matrix& value_centers,
                     const Matrix& coord_centers, std::size_t k, double alpha) {
  return sq_dist_to_column(data.values, i, value_centers, k) +
         alpha * sq_dist_to_column(data.coords, i, coord_centers, k);
}

void set_center_to_point(const PointSet& data, std::size_t i, Matrix& value_centers,
                         Matrix& coord_centers, std::size_t k) {
  for (std::size_t r = 0; r < data.values.rows(); ++r) value_centers(r, k) = data.values(r, i);
  for (std::size_t r = 0; r < data.coords.rows(); ++r) coord_centers(r, k) = data.coords(r, i);
}

// Recomputes the mean of every non-empty cluster, summing members in index
// order. Returns per-cluster member counts.
std::vector<std::size_t> update_centroids(const PointSet& data,
                                          const std::vector<std::uint32_t>& labels,
                                          std::size_t k, Matrix& value_centers,
                                          Matrix& coord_centers) {
  const std::size_t s = data.value_dim();
  const std::size_t c = data.coord_dim();
  Matrix value_sum(s, k);
  Matrix coord_sum(c, k);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::uint32_t l = labels[i];
    ++counts[l];
    for (std::size_t r = 0; r < s; ++r) value_sum(r, l) += data.values(r, i);
    for (std::size_t r = 0; r < c; ++r) coord_sum(r, l) += data.coords(r, i);
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] == 0) continue;
    const double count = static_cast<double>(counts[j]);
    for (std::size_t r = 0; r < s; ++r) value_centers(r, j) = value_sum(r, j) / count;
    for (std::size_t r = 0; r < c; ++r) coord_centers(r, j) = coord_sum(r, j) / count;
  }
  return counts;
}

void check_inputs(const PointSet& data, std::size_t k, double alpha) {
  data.validate();
  if (k == 0 || k > data.size()) {
    throw InvalidArgument("gssa: K must lie in [1, n], got K=" + std::to_string(k) +
                          " with n=" + std::to_string(data.size()));
  }
  if (!(alpha >= 0.0)) throw InvalidArgument("gssa: alpha must be >= 0");
}

std::vector<std::vector<std::size_t>> members_of(const std::vector<std::uint32_t>& labels,
                                                 std::size_t k) {
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  return members;
}

}  // namespace

std::vector<std::size_t> kmeanspp_seeds(const PointSet& data, std::size_t k, double alpha,
                                        std::uint64_t seed) {
  check_inputs(data, k, alpha);
  const std::size_t n = data.size();
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  std::vector<bool> taken(n, false);

  auto add_center = [&](std::size_t i) {
    chosen.push_back(i);
    taken[i] = true;
  };
  add_center(static_cast<std::size_t>(rng.index(n)));

  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) {
    nearest[i] = combined_dist(data, i, data.values, data.coords, chosen[0], alpha);
  }

  while (chosen.size() < k) {
    double total = 0.0;
    for (double d : nearest) total += d;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cumulative = 0.0;
      std::size_t last_positive = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (nearest[i] <= 0.0) continue;
        last_positive = i;
        cumulative += nearest[i];
        if (cumulative > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = last_positive;
    } else {
      // every point coincides with a center already: take the first unused one
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) {
          pick = i;
          break;
        }
      }
    }
    add_center(pick);
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i],
                            combined_dist(data, i, data.values, data.coords, pick, alpha));
    }
  }
  return chosen;
}

SuperpixelPartition gssa_segment(const PointSet& data, std::size_t k, double alpha,
                                 std::uint64_t seed, const GssaOptions& options) {
  check_inputs(data, k, alpha);
  const std::size_t n = data.size();
  const std::size_t s = data.value_dim();
  const std::size_t c = data.coord_dim();

  Matrix value_centers(s, k);
  Matrix coord_centers(c, k);
  const auto seeds = kmeanspp_seeds(data, k, alpha, seed);
  for (std::size_t j = 0; j < k; ++j) {
    set_center_to_point(data, seeds[j], value_centers, coord_centers, j);
  }

  std::vector<std::uint32_t> labels(n, kUnassigned);
  std::size_t iterations = 0;
  for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t best = 0;
      double best_d = combined_dist(data, i, value_centers, coord_centers, 0, alpha);
      for (std::size_t j = 1; j < k; ++j) {
        const double d = combined_dist(data, i, value_centers, coord_centers, j, alpha);
        if (d < best_d) {
          best_d = d;
          best = static_cast<std::uint32_t>(j);
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    iterations = iter;

    const auto counts = update_centroids(data, labels, k, value_centers, coord_centers);

    std::vector<bool> used(n, false);
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] != 0) continue;
      std::size_t worst = n;
      double worst_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        const double d = combined_dist(data, i, value_centers, coord_centers, labels[i], alpha);
        if (d > worst_d) {
          worst_d = d;
          worst = i;
        }
      }
      used[worst] = true;
      set_center_to_point(data, worst, value_centers, coord_centers, j);
    }

    if (options.observer) options.observer(iter, labels, value_centers, coord_centers);
  }

  // A reseed can stay empty when it landed on a zero-distance point (fewer
  // distinct points than K) or when the iteration budget ran out right after
  // it. Move the worst-fit point of a multi-member cluster into each empty one;
  // this never increases the objective.
  auto counts = std::vector<std::size_t>(k, 0);
  for (auto l : labels) ++counts[l];
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] != 0) continue;
    std::size_t worst = n;
    double worst_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (counts[labels[i]] < 2) continue;
      const double d = combined_dist(data, i, value_centers, coord_centers, labels[i], alpha);
      if (d > worst_d) {
        worst_d = d;
        worst = i;
      }
    }
    --counts[labels[worst]];
    labels[worst] = static_cast<std::uint32_t>(j);
    counts[j] = 1;
    update_centroids(data, labels, k, value_centers, coord_centers);
  }

  SuperpixelPartition part;
  part.members = members_of(labels, k);
  part.labels = std::move(labels);
  part.value_centroids = std::move(value_centers);
  part.coord_centroids = std::move(coord_centers);
  part.iterations = iterations;
  return part;
}

double gssa_objective(const PointSet& data, const SuperpixelPartition& part, double alpha) {
  data.validate();
  const std::size_t k = part.value_centroids.cols();
  if (part.labels.size() != data.size()) {
    throw ContractError("gssa_objective: partition covers " + std::to_string(part.labels.size()) +
                        " points, data has " + std::to_string(data.size()));
  }
  if (part.value_centroids.rows() != data.value_dim() ||
      part.coord_centroids.rows() != data.coord_dim() || part.coord_centroids.cols() != k) {
    throw ContractError("gssa_objective: centroid shapes do not match the data");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::uint32_t l = part.labels[i];
    if (l >= k) {
      throw ContractError("gssa_objective: label " + std::to_string(l) + " of point " +
                          std::to_string(i) + " is out of range for K=" + std::to_string(k));
    }
    total += combined_dist(data, i, part.value_centroids, part.coord_centroids, l, alpha);
  }
  return total;
}

SuperpixelPartition partition_from_labels(const PointSet& data,
                                          std::vector<std::uint32_t> labels, std::size_t k) {
  data.validate();
  if (labels.size() != data.size()) {
    throw ContractError("partition_from_labels: " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(data.size()) + " points");
  }
  for (auto l : labels) {
    if (l >= k) throw ContractError("partition_from_labels: label out of range");
  }
  SuperpixelPartition part;
  part.value_centroids = Matrix(data.value_dim(), k);
  part.coord_centroids = Matrix(data.coord_dim(), k);
  update_centroids(data, labels, k, part.value_centroids, part.coord_centroids);
  part.members = members_of(labels, k);
  part.labels = std::move(labels);
  return part;
}

std::size_t ConnectivityReport::disconnected_superpixels() const {
  return static_cast<std::size_t>(
      std::count_if(components.begin(), components.end(), [](std::size_t c) { return c > 1; }));
}

namespace {

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

}  // namespace

ConnectivityReport connectivity_report(const SuperpixelPartition& part, const Matrix& coords,
                                       std::optional<GridShape> grid, std::size_t knn) {
  const std::size_t n = part.labels.size();
  DisjointSets sets(n);
  ConnectivityReport report;

  if (grid) {
    report.neighbors = 4;
    const std::size_t h = grid->height;
    const std::size_t w = grid->width;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t i = y * w + x;
        if (x + 1 < w && part.labels[i] == part.labels[i + 1]) sets.unite(i, i + 1);
        if (y + 1 < h && part.labels[i] == part.labels[i + w]) sets.unite(i, i + w);
      }
    }
  } else {
    report.neighbors = knn;
    const std::size_t k = std::min(knn, n > 0 ? n - 1 : 0);
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double d = 0.0;
        for (std::size_t r = 0; r < coords.rows(); ++r) {
          const double diff = coords(r, i) - coords(r, j);
          d += diff * diff;
        }
        dist[j] = {j == i ? std::numeric_limits<double>::infinity() : d, j};
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
      for (std::size_t t = 0; t < k; ++t) {
        const std::size_t j = dist[t].second;
        if (part.labels[i] == part.labels[j]) sets.unite(i, j);
      }
    }
  }

  report.components.assign(part.superpixel_count(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (sets.find(i) == i) ++report.components[part.labels[i]];
  }
  return report;
}

}  // namespace sinr

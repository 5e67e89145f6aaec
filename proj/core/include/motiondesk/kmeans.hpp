#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace md {

struct KMeansResult {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> centroids;  // k * dim, row-major
  std::vector<std::size_t> assignments;
  double inertia = 0.0;
  // Inertia after every assignment pass, in order.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;
  bool converged = false;

  std::span<const double> centroid(std::size_t c) const {
    return std::span<const double>(centroids).subspan(c * dim, dim);
  }
};

/// Lloyd's algorithm with k-means++ seeding. points is row-major with dim
/// columns. Nearest-centroid ties resolve to the lowest index; a cluster that
/// empties is re-seeded at the point farthest from its current centroid.
/// Stops when an assignment pass changes nothing, or after max_iters.
KMeansResult kmeans(std::span<const double> points, std::size_t dim, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters = 100);

// Index of the nearest centroid (lowest index on ties) and its squared distance.
std::size_t nearest_centroid(std::span<const double> point, std::span<const double> centroids, std::size_t k,
                             double* squared_distance = nullptr);

}  // namespace md

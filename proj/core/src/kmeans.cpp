#include "motiondesk/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "motiondesk/error.hpp"
#include "motiondesk/rng.hpp"

namespace md {

namespace {
double squared_distance(const double* a, const double* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return acc;
}
}  // namespace

std::size_t nearest_centroid(std::span<const double> point, std::span<const double> centroids, std::size_t k,
                             double* best_distance) {
  const std::size_t dim = point.size();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double d = squared_distance(point.data(), centroids.data() + c * dim, dim);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (best_distance) *best_distance = best_d;
  return best;
}

KMeansResult kmeans(std::span<const double> points, std::size_t dim, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters) {
  if (dim == 0 || points.size() % dim != 0) throw ShapeError("kmeans: point buffer is not a multiple of dim");
  const std::size_t n = points.size() / dim;
  if (k == 0) throw ConfigError("kmeans: k must be at least 1");
  if (n < k) {
    throw ConfigError("kmeans: " + std::to_string(n) + " points cannot form " + std::to_string(k) + " clusters");
  }
  const double* P = points.data();

  KMeansResult result;
  result.k = k;
  result.dim = dim;
  result.centroids.assign(k * dim, 0.0);

  // k-means++ seeding.
  Rng rng(seed);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.below(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy_n(P + pick * dim, dim, result.centroids.begin() + static_cast<long>(c * dim));
    if (c + 1 == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(P + i * dim, result.centroids.data() + c * dim, dim));
      total += d2[i];
    }
    if (total <= 0.0) {
      pick = rng.below(n);
      continue;
    }
    const double target = rng.uniform() * total;
    double running = 0.0;
    pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      running += d2[i];
      if (running > target && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
  }

  std::vector<std::size_t> assignment(n, 0);
  std::vector<double> point_d2(n, 0.0);
  const auto assign = [&]() {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      const std::size_t c = nearest_centroid(points.subspan(i * dim, dim), result.centroids, k, &d);
      if (c != assignment[i]) changed = true;
      assignment[i] = c;
      point_d2[i] = d;
      inertia += d;
    }
    result.inertia_history.push_back(inertia);
    result.inertia = inertia;
    return changed;
  };

  assign();
  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      counts[assignment[i]] += 1;
      for (std::size_t j = 0; j < dim; ++j) sums[assignment[i] * dim + j] += P[i * dim + j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) {
        result.centroids[c * dim + j] = sums[c * dim + j] / static_cast<double>(counts[c]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      point_d2[i] = squared_distance(P + i * dim, result.centroids.data() + assignment[i] * dim, dim);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      const auto far = static_cast<std::size_t>(std::max_element(point_d2.begin(), point_d2.end()) - point_d2.begin());
      std::copy_n(P + far * dim, dim, result.centroids.begin() + static_cast<long>(c * dim));
      point_d2[far] = 0.0;
    }
    result.iterations = iter + 1;
    if (!assign()) {
      result.converged = true;
      break;
    }
  }
  result.assignments = std::move(assignment);
  return result;
}

}  // namespace md

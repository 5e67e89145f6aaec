#include "motiondesk/otsu.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "motiondesk/error.hpp"

namespace md {

double otsu_threshold(std::span<const double> magnitudes, std::size_t n_bins) {
  if (magnitudes.empty()) throw Error("otsu_threshold: empty input");
  if (n_bins < 2) throw ConfigError("otsu_threshold: need at least 2 bins");
  double top = 0.0;
  for (double m : magnitudes) {
    if (!std::isfinite(m) || m < 0.0) throw Error("otsu_threshold: magnitudes must be finite and non-negative");
    top = std::max(top, m);
  }
  if (top == 0.0) return 0.0;

  const auto edge = [&](std::size_t i) { return top * static_cast<double>(i) / static_cast<double>(n_bins); };
  std::vector<double> counts(n_bins, 0.0), sums(n_bins, 0.0);
  for (double m : magnitudes) {
    auto bin = std::min(n_bins - 1, static_cast<std::size_t>(m / top * static_cast<double>(n_bins)));
    // Keep binning consistent with the "strictly below edge" class rule.
    while (bin > 0 && m < edge(bin)) --bin;
    while (bin + 1 < n_bins && m >= edge(bin + 1)) ++bin;
    counts[bin] += 1.0;
    sums[bin] += m;
  }

  const double total = static_cast<double>(magnitudes.size());
  double total_sum = 0.0;
  for (double s : sums) total_sum += s;

  double best_variance = 0.0;
  std::size_t best_edge = 0;
  double below_count = 0.0, below_sum = 0.0;
  for (std::size_t i = 1; i < n_bins; ++i) {
    below_count += counts[i - 1];
    below_sum += sums[i - 1];
    const double above_count = total - below_count;
    if (below_count == 0.0 || above_count == 0.0) continue;
    const double w0 = below_count / total;
    const double w1 = above_count / total;
    const double mu0 = below_sum / below_count;
    const double mu1 = (total_sum - below_sum) / above_count;
    const double variance = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (variance > best_variance) {
      best_variance = variance;
      best_edge = i;
    }
  }
  return best_edge == 0 ? 0.0 : edge(best_edge);
}

}  // namespace md

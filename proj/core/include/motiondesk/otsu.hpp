#pragma once

#include <cstddef>
#include <span>

namespace md {

/// Otsu threshold over an n_bins histogram spanning [0, max]. Candidate
/// thresholds are the interior bin edges max * i / n_bins, i in [1, n_bins);
/// class 0 holds values strictly below the edge. Class means use the exact
/// values, not bin centres. The lowest edge attaining the largest
/// between-class variance wins; if that variance is zero everywhere the
/// result is 0.0 so nothing gets filtered.
double otsu_threshold(std::span<const double> magnitudes, std::size_t n_bins = 256);

}  // namespace md

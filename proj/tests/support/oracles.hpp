#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <tuple>
#include <vector>

namespace mdtest {

// Direct scan over every candidate edge; class 0 is strictly below the edge.
inline double brute_force_otsu(const std::vector<double>& values, std::size_t bins) {
  const double top = *std::max_element(values.begin(), values.end());
  if (top == 0.0) return 0.0;
  double best = 0.0, best_edge = 0.0;
  for (std::size_t i = 1; i < bins; ++i) {
    const double edge = top * static_cast<double>(i) / static_cast<double>(bins);
    double n0 = 0, s0 = 0, n1 = 0, s1 = 0;
    for (double v : values) {
      if (v < edge) {
        n0 += 1;
        s0 += v;
      } else {
        n1 += 1;
        s1 += v;
      }
    }
    if (n0 == 0 || n1 == 0) continue;
    const double n = n0 + n1, d = s0 / n0 - s1 / n1;
    const double var = (n0 / n) * (n1 / n) * d * d;
    if (var > best) {
      best = var;
      best_edge = edge;
    }
  }
  return best_edge;
}

using PairKey = std::tuple<std::size_t, std::size_t, std::size_t>;               // clip, t1, t2
using TripleKey = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;  // clip, t1, t2, t3

// All same-clip window pairs t1 < t2 with t2 - t1 <= ceil(dt / 2), scanning
// every pair of valid starts.
inline std::set<PairKey> brute_pairs(const std::vector<std::size_t>& lengths, std::size_t dt) {
  std::set<PairKey> out;
  const std::size_t radius = (dt + 1) / 2;
  for (std::size_t v = 0; v < lengths.size(); ++v)
    for (std::size_t a = 0; a + dt <= lengths[v]; ++a)
      for (std::size_t b = 0; b + dt <= lengths[v]; ++b)
        if (a < b && b - a <= radius) out.insert({v, a, b});
  return out;
}

inline std::set<TripleKey> brute_triples(const std::vector<std::size_t>& lengths, std::size_t dt) {
  std::set<TripleKey> out;
  const std::size_t radius = (dt + 1) / 2;
  for (std::size_t v = 0; v < lengths.size(); ++v)
    for (std::size_t a = 0; a + dt <= lengths[v]; ++a)
      for (std::size_t b = 0; b + dt <= lengths[v]; ++b)
        for (std::size_t c = 0; c + dt <= lengths[v]; ++c)
          if (a < b && b < c && b - a <= radius && c - b <= radius) out.insert({v, a, b, c});
  return out;
}

}  // namespace mdtest

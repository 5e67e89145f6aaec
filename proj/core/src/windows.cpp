#include "motiondesk/windows.hpp"

#include "motiondesk/error.hpp"
#include "motiondesk/rng.hpp"

namespace md {

namespace {

std::size_t window_count(std::size_t length, std::size_t duration) {
  return length >= duration ? length - duration + 1 : 0;
}

std::size_t gap(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

void check_duration(std::size_t duration) {
  if (duration == 0) throw ConfigError("window duration must be at least 1");
}

// Uniformly picks a clip other than `exclude` that has at least one window.
bool pick_other_clip(std::span<const std::size_t> counts, std::size_t exclude, Rng& rng, std::size_t& out) {
  std::size_t candidates = 0;
  for (std::size_t v = 0; v < counts.size(); ++v) candidates += (v != exclude && counts[v] > 0);
  if (candidates == 0) return false;
  std::size_t pick = rng.below(candidates);
  for (std::size_t v = 0; v < counts.size(); ++v) {
    if (v == exclude || counts[v] == 0) continue;
    if (pick-- == 0) {
      out = v;
      return true;
    }
  }
  return false;
}

}  // namespace

std::vector<ClipWindow> enumerate_windows(std::span<const std::size_t> clip_lengths, std::size_t duration,
                                          std::vector<std::string>* warnings) {
  check_duration(duration);
  std::vector<ClipWindow> out;
  for (std::size_t v = 0; v < clip_lengths.size(); ++v) {
    const std::size_t n = window_count(clip_lengths[v], duration);
    if (n == 0 && warnings) {
      warnings->push_back("clip " + std::to_string(v) + " has " + std::to_string(clip_lengths[v]) +
                          " frames, shorter than window duration " + std::to_string(duration) + "; skipped");
    }
    for (std::size_t s = 0; s < n; ++s) out.push_back({v, s, duration});
  }
  return out;
}

PairSets enumerate_windows_and_pairs(std::span<const std::size_t> clip_lengths, std::size_t duration,
                                     std::size_t negatives_per_positive, std::uint64_t seed) {
  PairSets sets;
  enumerate_windows(clip_lengths, duration, &sets.warnings);
  const std::size_t radius = neighbor_radius(duration);
  std::vector<std::size_t> counts(clip_lengths.size());
  for (std::size_t v = 0; v < clip_lengths.size(); ++v) counts[v] = window_count(clip_lengths[v], duration);

  for (std::size_t v = 0; v < counts.size(); ++v) {
    for (std::size_t t1 = 0; t1 < counts[v]; ++t1) {
      for (std::size_t t2 = t1 + 1; t2 < counts[v] && t2 - t1 <= radius; ++t2) {
        sets.positives.push_back({{v, t1, duration}, {v, t2, duration}, true});
      }
    }
  }

  Rng rng(seed);
  bool starved = false;
  for (const WindowPair& positive : sets.positives) {
    const ClipWindow anchor = positive.first;
    std::vector<std::size_t> distant;
    for (std::size_t s = 0; s < counts[anchor.video]; ++s) {
      if (gap(s, anchor.start) > radius) distant.push_back(s);
    }
    for (std::size_t n = 0; n < negatives_per_positive; ++n) {
      const bool want_cross = rng.uniform() < 0.8;
      std::size_t other = 0;
      if (!want_cross && !distant.empty()) {
        sets.negatives.push_back({anchor, {anchor.video, distant[rng.below(distant.size())], duration}, false});
      } else if (pick_other_clip(counts, anchor.video, rng, other)) {
        sets.negatives.push_back({anchor, {other, rng.below(counts[other]), duration}, false});
      } else if (!distant.empty()) {
        sets.negatives.push_back({anchor, {anchor.video, distant[rng.below(distant.size())], duration}, false});
      } else {
        starved = true;
      }
    }
  }
  if (starved) sets.warnings.push_back("some positives have no available negative pair");
  return sets;
}

TupleSets enumerate_tuples(std::span<const std::size_t> clip_lengths, std::size_t duration,
                           std::size_t corrupted_per_tuple, std::uint64_t seed) {
  TupleSets sets;
  enumerate_windows(clip_lengths, duration, &sets.warnings);
  const std::size_t radius = neighbor_radius(duration);
  std::vector<std::size_t> counts(clip_lengths.size());
  for (std::size_t v = 0; v < clip_lengths.size(); ++v) counts[v] = window_count(clip_lengths[v], duration);

  for (std::size_t v = 0; v < counts.size(); ++v) {
    for (std::size_t t1 = 0; t1 < counts[v]; ++t1) {
      for (std::size_t t2 = t1 + 1; t2 < counts[v] && t2 - t1 <= radius; ++t2) {
        for (std::size_t t3 = t2 + 1; t3 < counts[v] && t3 - t2 <= radius; ++t3) {
          sets.neighbors.push_back({{v, t1, duration}, {v, t2, duration}, {v, t3, duration}, true});
        }
      }
    }
  }

  std::size_t populated = 0;
  for (std::size_t c : counts) populated += (c > 0);
  if (populated < 2) {
    sets.warnings.push_back("fewer than two clips have windows; no corrupted tuples");
    return sets;
  }
  Rng rng(seed);
  for (const WindowTuple& tuple : sets.neighbors) {
    for (std::size_t n = 0; n < corrupted_per_tuple; ++n) {
      std::size_t other = 0;
      pick_other_clip(counts, tuple.first.video, rng, other);
      sets.corrupted.push_back({tuple.first, tuple.second, {other, rng.below(counts[other]), duration}, false});
    }
  }
  return sets;
}

}  // namespace md

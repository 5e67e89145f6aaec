#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace md {

/// Sub-clip of `duration` frames starting at frame `start` (0-based) of the
/// clip at position `video` in the enumerated clip list.
struct ClipWindow {
  std::size_t video = 0;
  std::size_t start = 0;
  std::size_t duration = 0;
  bool operator==(const ClipWindow&) const = default;
};

struct WindowPair {
  ClipWindow first, second;
  bool is_positive = false;
};

struct WindowTuple {
  ClipWindow first, second, third;
  bool is_positive = false;
};

struct PairSets {
  std::vector<WindowPair> positives;  // temporal neighbour pairs
  std::vector<WindowPair> negatives;  // sampled from the complement
  std::vector<std::string> warnings;
};

struct TupleSets {
  std::vector<WindowTuple> neighbors;  // temporal neighbour tuples
  std::vector<WindowTuple> corrupted;  // third window swapped to another video
  std::vector<std::string> warnings;
};

// ceil(duration / 2): the largest start offset between neighbouring windows.
inline std::size_t neighbor_radius(std::size_t duration) { return (duration + 1) / 2; }

// Every window of the given duration at every valid start. Clips shorter
// than duration contribute nothing and add a warning.
std::vector<ClipWindow> enumerate_windows(std::span<const std::size_t> clip_lengths, std::size_t duration,
                                          std::vector<std::string>* warnings = nullptr);

/// Positives: all same-clip window pairs with 1 <= |t2 - t1| <= radius,
/// first window earlier. For each positive, negatives_per_positive negatives
/// anchored on its first window: 80% of draws pair it with a random window
/// of another clip, 20% with a same-clip window farther than radius. When
/// the preferred kind does not exist the other kind is used.
PairSets enumerate_windows_and_pairs(std::span<const std::size_t> clip_lengths, std::size_t duration,
                                     std::size_t negatives_per_positive, std::uint64_t seed);

/// Neighbour tuples t1 < t2 < t3 of one clip with both gaps <= radius. Each
/// yields corrupted_per_tuple corrupted copies whose third window is drawn
/// uniformly from the valid starts of a different, uniformly chosen clip.
TupleSets enumerate_tuples(std::span<const std::size_t> clip_lengths, std::size_t duration,
                           std::size_t corrupted_per_tuple, std::uint64_t seed);

}  // namespace md

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace md {

struct PseudoLabeledClip {
  std::size_t clip_id = 0;
  std::size_t label = 0;
  std::vector<double> label_onehot;  // K entries, exactly one is 1
};

/// Clusters clip embeddings (Euclidean k-means, fixed seed) and uses the
/// cluster index of each clip as its pseudo motion label. Clip ids are the
/// row positions in embeddings.
std::vector<PseudoLabeledClip> assign_pseudo_labels(std::span<const std::vector<double>> embeddings, std::size_t K,
                                                    std::uint64_t seed);

// Text manifest, one "clip_id<TAB>label" line per clip.
void save_pseudo_labels(const std::filesystem::path& path, std::span<const PseudoLabeledClip> labels);
// K is needed to rebuild the one-hot vectors.
std::vector<PseudoLabeledClip> load_pseudo_labels(const std::filesystem::path& path, std::size_t K);

}  // namespace md

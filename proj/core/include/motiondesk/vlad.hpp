#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "motiondesk/clip.hpp"
#include "motiondesk/flow.hpp"

namespace md {

struct FlowCodebook {
  std::vector<FlowVector> centroids;
  std::uint64_t seed = 0;

  std::size_t size() const { return centroids.size(); }
  std::size_t vlad_dim() const { return 2 * centroids.size(); }
};

struct VladEmbedding {
  std::vector<double> values;
};

struct ClipEmbedding {
  std::vector<double> values;
};

// Entries of every field whose magnitude is not below threshold.
std::vector<FlowVector> surviving_entries(std::span<const FlowField> flows, double threshold);

/// k-means over all surviving entries of all fields. Throws ConfigError when
/// fewer than n_clusters entries survive and Error when the learned
/// centroids are not pairwise distinct (degenerate corpus).
FlowCodebook build_flow_codebook(std::span<const FlowField> flows, double threshold, std::size_t n_clusters,
                                 std::uint64_t seed);

/// VLAD over already-filtered entries: per centroid, the sum of residuals
/// (entry - centroid) of the entries assigned to it, flattened in centroid
/// order, then signed square root and L2 normalisation. An all-zero vector
/// is returned unchanged.
VladEmbedding vlad_from_entries(std::span<const FlowVector> survivors, const FlowCodebook& codebook);
VladEmbedding vlad_encode(const FlowField& flow, double threshold, const FlowCodebook& codebook);

// Concatenation of the per-field embeddings in temporal order.
ClipEmbedding embed_flows(std::span<const FlowField> flows, double threshold, const FlowCodebook& codebook);
// Flow between consecutive frames, then embed_flows. Needs at least 2 frames.
ClipEmbedding clip_embedding(const VideoClip& clip, double threshold, const FlowCodebook& codebook,
                             const FlowSettings& settings = {});

struct HandcraftedSettings {
  FlowSettings flow;
  std::size_t n_clusters = 128;
  std::size_t otsu_bins = 256;
  std::uint64_t codebook_seed = 0;
};

struct HandcraftedFeatures {
  std::vector<ClipEmbedding> embeddings;
  double threshold = 0.0;
  FlowCodebook codebook;
  // Every surviving flow entry was identical (e.g. static videos); all
  // embeddings are zero and codebook is empty.
  bool degenerate = false;
  std::vector<std::string> warnings;
  std::size_t dim() const { return embeddings.empty() ? 0 : embeddings.front().values.size(); }
};

/// Full hand-crafted pipeline over a corpus: flow for every consecutive
/// frame pair, one Otsu threshold over all magnitudes of all fields, a
/// codebook over the survivors, then per-clip VLAD concatenation.
HandcraftedFeatures extract_handcrafted_features(std::span<const VideoClip> clips, const HandcraftedSettings& settings);

}  // namespace md

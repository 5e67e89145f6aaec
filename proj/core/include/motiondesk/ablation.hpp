#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "motiondesk/evaluate.hpp"
#include "motiondesk/train.hpp"

namespace md {

struct AccuracyRow {
  EvalMode mode;
  double accuracy = 0.0;
};

struct AblationCell {
  Variant variant = Variant::full;
  std::uint64_t seed = 0;
  // fused (the variant's final classifier), visual_only, and motion_only
  // when the variant trained the motion-only head.
  std::vector<AccuracyRow> accuracies;
  TrainLog log;
  ModelBundle model;
};

/// Trains and evaluates every (variant, seed) cell, in variant-major order.
/// Within one seed, variants that share a prefix of training steps share its
/// computation. Seeds run on up to `threads` worker threads; results do not
/// depend on the thread count.
std::vector<AblationCell> run_ablation(const TrainConfig& base, const TrainingSet& data,
                                       std::span<const LabeledImage> test, std::span<const Variant> variants,
                                       std::span<const std::uint64_t> seeds, std::size_t threads = 1);

}  // namespace md

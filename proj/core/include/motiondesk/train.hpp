#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "motiondesk/clip.hpp"
#include "motiondesk/config.hpp"
#include "motiondesk/corpus.hpp"
#include "motiondesk/nets.hpp"

namespace md {

struct LossRecord {
  std::size_t step = 0;  // 1..5
  std::size_t iteration = 0;
  double loss = 0.0;
};

/// Labelled training images plus the unlabelled clips (with pseudo labels
/// for variants that use the motion classification term).
struct TrainingSet {
  std::vector<const GrayImage*> images;
  std::vector<std::size_t> labels;
  std::vector<VideoClip> clips;
};

TrainingSet make_training_set(std::span<const LabeledImage> train_images, std::vector<VideoClip> clips);

struct TrainLog {
  std::vector<LossRecord> trace;
  std::vector<std::string> warnings;
};

using ProgressFn = std::function<void(const LossRecord&)>;

// The training steps a variant runs, in order.
std::vector<std::size_t> variant_steps(Variant variant);
// Parameter groups updated by one step of a variant.
std::vector<ParamGroup> update_set(Variant variant, std::size_t step);
// Identifies a (variant, step) computation; variants whose step keys agree
// on a prefix produce identical models after that prefix.
std::string step_key(Variant variant, std::size_t step);

ModelBundle initialize_model(const TrainConfig& config);

/// Runs config.iterations[step - 1] Adam iterations of one step. Every step
/// draws from its own generator derived from (config.seed, step) and the
/// learning-rate schedule restarts at iteration 0. Throws NumericalError on a
/// non-finite loss.
void run_step(const TrainConfig& config, const TrainingSet& data, Variant variant, std::size_t step,
              ModelBundle& model, TrainLog& log, const ProgressFn& progress = {});

struct TrainResult {
  ModelBundle model;
  TrainLog log;
};

TrainResult train(const TrainConfig& config, const TrainingSet& data, const ProgressFn& progress = {});

}  // namespace md

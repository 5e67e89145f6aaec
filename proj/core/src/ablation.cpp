#include "motiondesk/ablation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <thread>

namespace md {

namespace {

struct Snapshot {
  ModelBundle model;
  TrainLog log;
};

std::vector<AblationCell> run_seed(const TrainConfig& base, const TrainingSet& data,
                                   std::span<const LabeledImage> test, std::span<const Variant> variants,
                                   std::uint64_t seed) {
  TrainConfig config = base;
  config.seed = seed;
  std::map<std::string, Snapshot> done;  // key: joined step keys
  std::vector<AblationCell> cells;
  for (Variant variant : variants) {
    const std::vector<std::size_t> steps = variant_steps(variant);
    Snapshot state{initialize_model(config), {}};
    std::string prefix;
    std::size_t next = 0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const std::string key = prefix + "/" + step_key(variant, steps[i]);
      auto it = done.find(key);
      if (it == done.end()) break;
      state = it->second;
      prefix = key;
      next = i + 1;
    }
    for (std::size_t i = next; i < steps.size(); ++i) {
      run_step(config, data, variant, steps[i], state.model, state.log);
      prefix += "/" + step_key(variant, steps[i]);
      done.emplace(prefix, state);
    }

    AblationCell cell{variant, seed, {}, state.log, state.model};
    cell.accuracies.push_back({EvalMode::fused, evaluate(cell.model, test, final_mode(variant)).accuracy});
    cell.accuracies.push_back({EvalMode::visual_only, evaluate(cell.model, test, EvalMode::visual_only).accuracy});
    if (variant == Variant::only_mr) {
      cell.accuracies.push_back({EvalMode::motion_only, evaluate(cell.model, test, EvalMode::motion_only).accuracy});
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace

std::vector<AblationCell> run_ablation(const TrainConfig& base, const TrainingSet& data,
                                       std::span<const LabeledImage> test, std::span<const Variant> variants,
                                       std::span<const std::uint64_t> seeds, std::size_t threads) {
  std::vector<std::vector<AblationCell>> per_seed(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        per_seed[i] = run_seed(base, data, test, variants, seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(seeds.size(), 1));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<AblationCell> cells;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    for (std::size_t s = 0; s < seeds.size(); ++s) cells.push_back(std::move(per_seed[s][v]));
  }
  return cells;
}

}  // namespace md

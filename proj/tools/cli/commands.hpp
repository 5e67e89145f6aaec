#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "motiondesk/ablation.hpp"
#include "motiondesk/config.hpp"

namespace mdesk {

namespace fs = std::filesystem;

// Global flags plus the per-command paths. Empty paths fall back to the
// defaults documented on each command.
struct Options {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  fs::path out;
  fs::path data;
  fs::path cache;
  fs::path labels;
  fs::path checkpoint;
  std::vector<std::string> modes;
};

// Config file (if any) with --seed / --variant applied for `command`.
md::RunConfig resolve_config(const Options& opts, const std::string& command);

int cmd_gen_data(const Options& opts);
int cmd_features(const Options& opts);
int cmd_pseudo_label(const Options& opts);
int cmd_train(const Options& opts);
int cmd_eval(const Options& opts);
int cmd_retrieve(const Options& opts);
int cmd_ablate(const Options& opts);

// Worker count for ablations: hardware concurrency capped by MD_THREADS.
std::size_t worker_threads();

// CSV / SVG writers shared with the tests.
std::string results_csv(const std::vector<md::AblationCell>& cells);
std::string metrics_csv(const std::vector<md::AblationCell>& cells);
std::string bar_chart_svg(const std::vector<std::pair<std::string, double>>& bars, const std::string& title);
std::string line_chart_svg(const std::vector<double>& values, const std::string& title);

// Parses argv, dispatches, and maps errors to exit codes:
// 0 success, 2 usage or missing input, 3 numerical failure.
int run(int argc, char** argv);

}  // namespace mdesk

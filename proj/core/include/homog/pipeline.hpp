#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "homog/config.hpp"

namespace homog {

enum class Stage { cell, tensors, macro, tdl, channel_validate, micro_study };

/// "cell", "tensors", "macro", "tdl", "channel-validate", "micro-study".
Stage parse_stage(const std::string& name);
const char* to_string(Stage stage) noexcept;

struct RunOptions {
  std::filesystem::path out_dir;  ///< empty: the config's output.dir
  int threads = 1;
  bool auto_upstream = true;      ///< compute missing upstream results instead of reading them
};

struct StageResult {
  std::vector<std::filesystem::path> artifacts;
  std::string summary;  ///< one line for the terminal
};

/// Runs one stage and writes its artifacts. Solver divergence raises SolverError
/// after the last iterate has been written.
StageResult run_pipeline(const RunConfig& config, Stage stage, const RunOptions& options = {});

}  // namespace homog

#pragma once

// Run configuration: every tunable of a demo/train/eval run, read from one
// JSON file. Angles in the file are degrees and carry a _deg suffix;
// everything else is SI.

#include "spinal/experiment.hpp"
#include "spinal/grp_model.hpp"

#include <cstdint>
#include <string>

namespace spinal {

struct Seeds {
  std::uint64_t demo = 1;  // training demonstrations
  std::uint64_t init = 1;  // weight init; the knee model uses init + 1
  std::uint64_t eval = 2;  // evaluation tasks, distinct from the demos
};

struct RunConfig {
  experiment::SimulationConfig sim;
  experiment::SampleRanges ranges;
  grp::GrpConfig hip;   // seed is derived from seeds.init
  grp::GrpConfig knee;
  int episodes = 2000;
  int demos = 40;
  int eval_trajectories = 20;
  double active_threshold = 0.1;
  Seeds seeds;

  RunConfig();

  /// Pushes seeds.init into the two model configs.
  void apply_seeds();
  /// Throws grp::ConfigError naming the dotted key of the first bad value.
  void validate() const;
};

/// Parses a JSON document. Unknown keys, wrong types, and invalid values
/// raise grp::ConfigError with the dotted key (e.g. "knee.mu").
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

std::string dump_run_config(const RunConfig& config);

}  // namespace spinal

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "causalrank/metrics.hpp"
#include "causalrank/profile.hpp"
#include "causalrank/scoring.hpp"
#include "causalrank/synth.hpp"
#include "causalrank/ticc.hpp"

namespace causalrank {

struct SweepConfig {
  std::string experiment = "states";  // states | cross_time_lag | noise_ratio | convergence
  std::vector<Scalar> grid;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> methods;  // full | single_state | single_lag | no_propagation
};

// One JSON document carries every knob; unknown keys are rejected and
// `--set a.b.c=value` overrides single fields.
struct PipelineConfig {
  std::uint64_t seed = 1;
  int threads = 0;
  std::filesystem::path out = "out";
  std::filesystem::path data_csv;
  std::filesystem::path ground_truth;
  TiccParams ticc;
  ScoringParams scoring;
  ThresholdConfig threshold;
  SynthConfig synth;
  EvalParams eval;
  SweepConfig sweep;

  // Pushes the master seed and thread count into the per-stage configs.
  void finalize();
};

PipelineConfig default_config();

PipelineConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const PipelineConfig& config);

// Loads `file` when given (otherwise the defaults), applies the overrides,
// and finalizes. Each override is `dotted.path=value`; the value is parsed
// as JSON when possible, as a string otherwise.
PipelineConfig load_config(const std::optional<std::filesystem::path>& file,
                           const std::vector<std::string>& overrides);

}  // namespace causalrank

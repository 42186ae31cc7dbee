#pragma once

#include <string>
#include <vector>

#include "causalrank/config.hpp"
#include "causalrank/pipeline.hpp"

namespace causalrank {

enum class SweepExperiment { States, CrossTimeLag, NoiseRatio, Convergence };
enum class SweepMethod { Full, SingleState, SingleLag, NoPropagation };

SweepExperiment experiment_from_string(const std::string& name);
SweepMethod method_from_string(const std::string& name);
std::string to_string(SweepExperiment experiment);
std::string to_string(SweepMethod method);

struct TrialRecord {
  std::string param;
  Scalar value = 0.0;
  std::string method;
  std::uint64_t seed = 0;
  TrialMetrics metrics;
  bool failed = false;
  std::string error;
};

struct ConvergenceTrace {
  std::uint64_t seed = 0;
  std::vector<Scalar> objective;
};

struct SweepResult {
  std::string param;
  std::vector<TrialRecord> records;     // (value, method, seed) order
  std::vector<ConvergenceTrace> traces; // convergence experiment only
  int failures = 0;
};

// Runs one trial per (grid value, seed, method); trials execute in
// parallel and an individual failure is recorded without aborting the
// sweep. The convergence experiment records reconstruction-solver
// objective traces instead of ranking metrics.
SweepResult run_sweep(const PipelineConfig& base);

}  // namespace causalrank

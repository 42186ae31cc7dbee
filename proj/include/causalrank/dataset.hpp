#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "causalrank/types.hpp"

namespace causalrank {

// Aligned multi-run sensor data: R runs, each N sensors x T timestamps.
struct RunDataset {
  std::vector<Matrix> runs;  // each N x T, ordered by run id
  std::vector<std::string> sensor_names;
  std::vector<std::string> run_ids;

  Index sensor_count() const { return runs.empty() ? 0 : runs.front().rows(); }
  Index time_count() const { return runs.empty() ? 0 : runs.front().cols(); }
  Index run_count() const { return static_cast<Index>(runs.size()); }
};

inline constexpr Scalar kStddevFloor = 1e-8;

// Per-sensor z-score statistics pooled over all runs and timestamps.
struct StandardizationStats {
  Vector mean;
  Vector stddev;  // entries clamped to >= kStddevFloor
};

// One data subsequence: window_size consecutive timestamps of one run,
// stacked oldest-first into a single vector of length N * window_size.
struct StackedWindow {
  Vector values;
  Index end_time = 0;  // 1-based end timestamp t
  Index run = 0;       // 0-based run position within the dataset
};

// Reads the long-format CSV `run,timestamp,<sensor_1>,...,<sensor_N>`.
// `source` may be a single file or a directory of .csv files sharing one
// schema. Runs are ordered by id (numerically when every id parses as an
// integer, lexicographically otherwise).
RunDataset load_runs(const std::filesystem::path& source);

// Global z-score per sensor. Without `stats`, statistics are pooled over
// the whole dataset (population stddev) and returned; with `stats`, the
// supplied values are applied unchanged.
std::pair<RunDataset, StandardizationStats> standardize(
    const RunDataset& data,
    const std::optional<StandardizationStats>& stats = std::nullopt);

// All windows of all runs, run-major then by end time; exactly
// T - window_size + 1 windows per run with end times window_size..T.
std::vector<StackedWindow> stack_windows(const RunDataset& data, Index window_size);

}  // namespace causalrank

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "causalrank/dataset.hpp"
#include "causalrank/profile.hpp"
#include "causalrank/scoring.hpp"
#include "causalrank/sweep.hpp"
#include "causalrank/synth.hpp"
#include "causalrank/ticc.hpp"

namespace causalrank {

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

// Long-format data CSV (`run,timestamp,<sensors...>`), one row per
// (run, timestamp), full double round-trip precision.
void write_run_csv(const RunDataset& data, const std::filesystem::path& path);

// `timestamp,<sensors...>` with one row per timestamp.
void write_point_scores_csv(const Matrix& scores,
                            const std::vector<std::string>& sensor_names,
                            const std::filesystem::path& path);

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path);
nlohmann::json sweep_summary_json(const SweepResult& result);
void write_convergence_csv(const ConvergenceTrace& trace,
                           const std::filesystem::path& path);

// Flat stats object {sensor_name: {mean, stddev}}.
nlohmann::json stats_to_json(const StandardizationStats& stats,
                             const std::vector<std::string>& sensor_names);
StandardizationStats stats_from_json(const nlohmann::json& doc,
                                     const std::vector<std::string>& sensor_names);

nlohmann::json ticc_params_to_json(const TiccParams& params);
TiccParams ticc_params_from_json(const nlohmann::json& doc);

nlohmann::json synth_config_to_json(const SynthConfig& cfg);

// Models as dense row-major matrices, assignments as {run, t, cluster}
// records, objective trace as a number array.
nlohmann::json clustering_to_json(const ClusteringResult& result,
                                  const std::vector<std::string>& run_ids);
ClusteringResult clustering_from_json(const nlohmann::json& doc,
                                      const std::vector<std::string>& run_ids);

nlohmann::json profile_to_json(const Profile& profile);
Profile profile_from_json(const nlohmann::json& doc);

nlohmann::json report_to_json(const ProfileDiffReport& report);

nlohmann::json ranking_to_json(const std::vector<std::pair<Index, Scalar>>& ranking,
                               const std::vector<std::string>& sensor_names);
std::vector<std::string> ranking_sensors_from_json(const nlohmann::json& doc);

nlohmann::json ground_truth_to_json(const GroundTruth& truth, const SynthConfig& cfg,
                                    const std::vector<std::string>& sensor_names,
                                    const std::vector<std::string>& run_ids);

struct GroundTruthInfo {
  std::vector<std::string> root_sensors;
  std::string anomalous_run_id;  // empty when nothing was injected
};
GroundTruthInfo ground_truth_info_from_json(const nlohmann::json& doc);

}  // namespace causalrank

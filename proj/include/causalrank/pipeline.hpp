#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "causalrank/dataset.hpp"
#include "causalrank/metrics.hpp"
#include "causalrank/profile.hpp"
#include "causalrank/scoring.hpp"
#include "causalrank/synth.hpp"
#include "causalrank/types.hpp"

namespace causalrank {

struct RankOutput {
  ScoreSeries scores;
  std::vector<std::pair<Index, Scalar>> ranking;
  ClusteringResult refit;
  bool solver_converged = true;
};

// Per-window MRFs of a single run, fitted with both temporal-consistency
// penalties off and the sparsity weight scaled by 1/run_window so the
// per-sample penalty matches the profile fit it will be compared against.
ClusteringResult refit_anomalous_run(const Profile& old_profile,
                                     const Matrix& standardized_run);

// Score causal anomalies for one standardized run against an old profile:
// refit per-window MRFs, build broken networks against the old averaged
// profile, solve the reconstruction per window, aggregate, rank.
RankOutput rank_run(const Profile& old_profile, const Matrix& standardized_run,
                    const ScoringParams& scoring);

struct MonitorOutcome {
  StandardizationStats stats;
  std::vector<ProfileDiffReport> reports;
  std::optional<Profile> final_old_profile;
  std::optional<Profile> final_new_profile;
  // Most recent anomalous verdict, with the old profile that preceded it
  // (the ground truth for ranking that run).
  std::optional<std::string> anomalous_run_id;
  std::optional<Profile> anomalous_old_profile;
};

// Replays every run of the dataset through the rolling profile window.
// Standardization statistics are pooled over the first run_window
// (warm-up) runs and applied to everything after.
MonitorOutcome run_monitor(const RunDataset& raw, const TiccParams& params,
                           const ThresholdConfig& threshold);

struct TrialMetrics {
  Scalar precision = 0.0;
  Scalar recall = 0.0;
  Scalar ndcg = 0.0;
};

// Trimmed synth -> profile -> rank -> metrics pipeline used by sweeps: the
// old profile is fitted on the run_window runs immediately preceding the
// anomalous run, exactly what run_monitor holds when that run arrives.
TrialMetrics run_trial(const SynthConfig& synth, const TiccParams& ticc,
                       const ScoringParams& scoring, const EvalParams& eval);

}  // namespace causalrank

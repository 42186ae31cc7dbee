#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "causalrank/ticc.hpp"
#include "causalrank/types.hpp"

namespace causalrank {

// The learned description of one run window: K cluster MRFs plus the
// per-(timestamp, run) assignments that reference them.
struct Profile {
  std::vector<std::string> run_ids;  // oldest to newest, size run_window
  ClusteringResult clustering;
  TiccParams params;
  Index sensor_count = 0;

  const Matrix& mrf_at(Index end_time, Index run) const;
};

// Per-end-timestamp MRFs, each the entrywise mean of the assigned cluster
// matrices across the run window.
struct AveragedProfile {
  std::vector<Matrix> mrfs;
  Index first_end_time = 1;

  const Matrix& at(Index end_time) const;
};

AveragedProfile build_averaged_profile(const Profile& profile);

struct ProfileDiff {
  Scalar score = 0.0;  // mean of per_timestamp
  std::vector<Scalar> per_timestamp;
};

// Cosine distance (on absolute entries, in [0,1]) between the two
// profiles' MRFs at each end-timestamp, averaged over timestamps.
ProfileDiff profile_difference(const AveragedProfile& a, const AveragedProfile& b);

struct ThresholdConfig {
  Scalar floor = 0.05;        // absolute score floor
  Scalar mad_multiplier = 3.0;
  int min_history = 5;  // below this, only the floor applies
};

struct RunVerdict {
  bool anomalous = false;
  Scalar threshold = 0.0;
};

// Anomalous iff current > max(floor, median(history) + mad_multiplier * MAD).
RunVerdict detect_anomalous_run(const std::vector<Scalar>& history, Scalar current,
                                const ThresholdConfig& cfg);

struct ProfileDiffReport {
  std::string run_id;
  Scalar score = 0.0;
  Scalar threshold = 0.0;
  bool anomalous = false;
  std::vector<Scalar> per_timestamp;
};

// Rolling new/old profile pair over arriving runs. Feed standardized runs
// in arrival order; a profile is fitted once run_window runs are present,
// and each later arrival compares the fresh profile against the previous
// one. Single-writer: one arrival processed at a time.
class RunMonitor {
 public:
  RunMonitor(TiccParams params, ThresholdConfig threshold);

  // Returns a report once both profile slots are filled, otherwise nullopt.
  std::optional<ProfileDiffReport> advance(Matrix run, std::string run_id);

  const std::optional<Profile>& old_profile() const { return old_profile_; }
  const std::optional<Profile>& new_profile() const { return new_profile_; }
  const std::vector<Scalar>& score_history() const { return score_history_; }
  Index runs_seen() const { return runs_seen_; }

 private:
  TiccParams params_;
  ThresholdConfig threshold_;
  std::deque<std::pair<Matrix, std::string>> window_;
  std::optional<Profile> old_profile_;
  std::optional<Profile> new_profile_;
  std::vector<Scalar> score_history_;
  Index runs_seen_ = 0;
};

// Fits one profile over exactly params.run_window standardized runs.
Profile fit_profile(const std::vector<Matrix>& runs,
                    const std::vector<std::string>& run_ids,
                    const TiccParams& params);

}  // namespace causalrank

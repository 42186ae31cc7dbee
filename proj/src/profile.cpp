#include "causalrank/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "causalrank/errors.hpp"
#include "causalrank/linalg.hpp"

namespace causalrank {

namespace {

Scalar median_of(std::vector<Scalar> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

const Matrix& Profile::mrf_at(Index end_time, Index run) const {
  const int id = clustering.cluster_of(end_time, run);
  return clustering.models[static_cast<std::size_t>(id - 1)].precision;
}

const Matrix& AveragedProfile::at(Index end_time) const {
  const Index i = end_time - first_end_time;
  if (i < 0 || i >= static_cast<Index>(mrfs.size()))
    throw Error("averaged profile has no MRF at end_time " + std::to_string(end_time));
  return mrfs[static_cast<std::size_t>(i)];
}

AveragedProfile build_averaged_profile(const Profile& profile) {
  const auto run_count = static_cast<Index>(profile.run_ids.size());
  if (run_count == 0) throw Error("build_averaged_profile: empty profile");

  Index first = 0;
  Index last = 0;
  {
    Index lo = std::numeric_limits<Index>::max();
    Index hi = std::numeric_limits<Index>::min();
    for (const auto& a : profile.clustering.assignments) {
      lo = std::min(lo, a.end_time);
      hi = std::max(hi, a.end_time);
    }
    first = lo;
    last = hi;
  }

  AveragedProfile out;
  out.first_end_time = first;
  out.mrfs.reserve(static_cast<std::size_t>(last - first + 1));
  for (Index t = first; t <= last; ++t) {
    Matrix sum;
    for (Index r = 0; r < run_count; ++r) {
      const Matrix& m = profile.mrf_at(t, r);
      if (sum.size() == 0)
        sum = m;
      else
        sum += m;
    }
    out.mrfs.push_back(sum / static_cast<Scalar>(run_count));
  }
  return out;
}

ProfileDiff profile_difference(const AveragedProfile& a, const AveragedProfile& b) {
  if (a.mrfs.size() != b.mrfs.size())
    throw Error("profile_difference: profiles have different lengths");
  if (a.mrfs.empty()) throw Error("profile_difference: empty profiles");

  ProfileDiff diff;
  diff.per_timestamp.reserve(a.mrfs.size());
  Scalar total = 0.0;
  for (std::size_t i = 0; i < a.mrfs.size(); ++i) {
    const Scalar d = abs_cosine_distance(a.mrfs[i], b.mrfs[i]);
    diff.per_timestamp.push_back(d);
    total += d;
  }
  diff.score = total / static_cast<Scalar>(a.mrfs.size());
  return diff;
}

RunVerdict detect_anomalous_run(const std::vector<Scalar>& history, Scalar current,
                                const ThresholdConfig& cfg) {
  RunVerdict verdict;
  verdict.threshold = cfg.floor;
  if (static_cast<int>(history.size()) >= cfg.min_history) {
    const Scalar med = median_of(history);
    std::vector<Scalar> dev;
    dev.reserve(history.size());
    for (Scalar h : history) dev.push_back(std::abs(h - med));
    const Scalar mad = median_of(std::move(dev));
    verdict.threshold = std::max(cfg.floor, med + cfg.mad_multiplier * mad);
  }
  verdict.anomalous = current > verdict.threshold;
  return verdict;
}

Profile fit_profile(const std::vector<Matrix>& runs,
                    const std::vector<std::string>& run_ids,
                    const TiccParams& params) {
  if (static_cast<Index>(runs.size()) != params.run_window)
    throw ConfigError("fit_profile: expected run_window (" +
                      std::to_string(params.run_window) + ") runs, got " +
                      std::to_string(runs.size()));
  if (runs.size() != run_ids.size())
    throw ConfigError("fit_profile: run/run_id count mismatch");

  RunDataset ds;
  ds.runs = runs;
  ds.run_ids = run_ids;
  ds.sensor_names.resize(static_cast<std::size_t>(runs.front().rows()));
  const auto windows = stack_windows(ds, params.window_size);

  Profile p;
  p.run_ids = run_ids;
  p.params = params;
  p.sensor_count = runs.front().rows();
  p.clustering = fit(windows, p.sensor_count, params);
  return p;
}

RunMonitor::RunMonitor(TiccParams params, ThresholdConfig threshold)
    : params_(std::move(params)), threshold_(threshold) {}

std::optional<ProfileDiffReport> RunMonitor::advance(Matrix run, std::string run_id) {
  window_.emplace_back(std::move(run), std::move(run_id));
  while (static_cast<Index>(window_.size()) > params_.run_window) window_.pop_front();
  ++runs_seen_;

  if (static_cast<Index>(window_.size()) < params_.run_window) return std::nullopt;

  std::vector<Matrix> runs;
  std::vector<std::string> ids;
  for (const auto& [m, id] : window_) {
    runs.push_back(m);
    ids.push_back(id);
  }
  old_profile_ = std::move(new_profile_);
  new_profile_ = fit_profile(runs, ids, params_);

  if (!old_profile_) return std::nullopt;

  const ProfileDiff diff = profile_difference(build_averaged_profile(*old_profile_),
                                              build_averaged_profile(*new_profile_));
  const RunVerdict verdict = detect_anomalous_run(score_history_, diff.score, threshold_);
  score_history_.push_back(diff.score);

  ProfileDiffReport report;
  report.run_id = new_profile_->run_ids.back();
  report.score = diff.score;
  report.threshold = verdict.threshold;
  report.anomalous = verdict.anomalous;
  report.per_timestamp = diff.per_timestamp;
  return report;
}

}  // namespace causalrank

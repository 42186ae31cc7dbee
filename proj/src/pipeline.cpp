#include "causalrank/pipeline.hpp"

#include <set>

#include "causalrank/errors.hpp"
#include "causalrank/parallel.hpp"
#include "causalrank/random.hpp"

namespace causalrank {

ClusteringResult refit_anomalous_run(const Profile& old_profile,
                                     const Matrix& standardized_run) {
  if (standardized_run.rows() != old_profile.sensor_count)
    throw StateError("rank_run: run sensor count does not match the profile");
  const Index sensors = standardized_run.rows();

  TiccParams refit_params = old_profile.params;
  refit_params.sparsity /= static_cast<Scalar>(old_profile.params.run_window);
  refit_params.run_window = 1;

  RunDataset single;
  single.runs = {standardized_run};
  single.run_ids = {"anomalous"};
  single.sensor_names.resize(static_cast<std::size_t>(sensors));
  const auto windows = stack_windows(single, refit_params.window_size);
  return fit(windows, sensors, refit_params, /*disable_ltc=*/true,
             /*disable_gtc=*/true);
}

RankOutput rank_run(const Profile& old_profile, const Matrix& standardized_run,
                    const ScoringParams& scoring) {
  const Index sensors = standardized_run.rows();
  const Index total_time = standardized_run.cols();
  const Index window_size = old_profile.params.window_size;

  RankOutput out;
  out.refit = refit_anomalous_run(old_profile, standardized_run);

  const AveragedProfile reference = build_averaged_profile(old_profile);
  const Index first = reference.first_end_time;
  const auto window_count = static_cast<Index>(reference.mrfs.size());
  if (window_count != total_time - window_size + 1)
    throw StateError("rank_run: profile length does not match the run length");

  std::vector<Vector> s_results(static_cast<std::size_t>(window_count));
  std::vector<Vector> b_results(static_cast<std::size_t>(window_count));
  std::vector<char> converged(static_cast<std::size_t>(window_count), 1);

  parallel_for(window_count, scoring.threads, [&](Index i) {
    const Index end_time = first + i;
    const Matrix& ground_truth = reference.at(end_time);
    const Matrix& observed =
        out.refit.models[static_cast<std::size_t>(out.refit.cluster_of(end_time, 0) - 1)]
            .precision;
    const BrokenNetworkPair pair = build_broken_network(
        ground_truth, observed, scoring.vanish_ratio, scoring.edge_floor);
    const auto adjacency = normalize_adjacency(ground_truth);
    const auto op = propagation_operator(adjacency, scoring.propagation_factor);
    WindowScores ws = solve_window_scores(op, pair, scoring.l1_weight, scoring.solver);
    if (!ws.converged) converged[static_cast<std::size_t>(i)] = 0;
    b_results[static_cast<std::size_t>(i)] = fault_propagate(op, ws.s);
    s_results[static_cast<std::size_t>(i)] = std::move(ws.s);
  });

  for (Index i = 0; i < window_count; ++i) {
    out.scores.window_scores[first + i] = std::move(s_results[static_cast<std::size_t>(i)]);
    out.scores.window_propagated[first + i] =
        std::move(b_results[static_cast<std::size_t>(i)]);
    if (!converged[static_cast<std::size_t>(i)]) out.solver_converged = false;
  }

  out.scores.point_scores = aggregate_point_scores(
      out.scores.window_scores, sensors, window_size, total_time);
  out.scores.propagated = aggregate_point_scores(
      out.scores.window_propagated, sensors, window_size, total_time);
  out.ranking = rank_sensors(out.scores.point_scores);
  return out;
}

MonitorOutcome run_monitor(const RunDataset& raw, const TiccParams& params,
                           const ThresholdConfig& threshold) {
  if (raw.run_count() < params.run_window)
    throw ConfigError("monitor warm-up needs at least run_window (" +
                      std::to_string(params.run_window) + ") runs, got " +
                      std::to_string(raw.run_count()));

  // Pool statistics over the warm-up runs only, so later (possibly
  // anomalous) runs are measured on the training scale.
  RunDataset warmup;
  warmup.sensor_names = raw.sensor_names;
  for (Index r = 0; r < params.run_window; ++r) {
    warmup.runs.push_back(raw.runs[static_cast<std::size_t>(r)]);
    warmup.run_ids.push_back(raw.run_ids[static_cast<std::size_t>(r)]);
  }
  MonitorOutcome outcome;
  outcome.stats = standardize(warmup).second;
  const RunDataset standardized = standardize(raw, outcome.stats).first;

  RunMonitor monitor(params, threshold);
  for (Index r = 0; r < standardized.run_count(); ++r) {
    auto report = monitor.advance(standardized.runs[static_cast<std::size_t>(r)],
                                  standardized.run_ids[static_cast<std::size_t>(r)]);
    if (!report) continue;
    if (report->anomalous) {
      outcome.anomalous_run_id = report->run_id;
      outcome.anomalous_old_profile = monitor.old_profile();
    }
    outcome.reports.push_back(std::move(*report));
  }
  outcome.final_old_profile = monitor.old_profile();
  outcome.final_new_profile = monitor.new_profile();
  return outcome;
}

TrialMetrics run_trial(const SynthConfig& synth, const TiccParams& ticc,
                       const ScoringParams& scoring, const EvalParams& eval) {
  if (synth.anomaly_count < 1)
    throw ConfigError("run_trial needs anomaly_count >= 1");
  const SynthResult result = generate(synth);
  const Index anomalous = result.truth.anomalous_run;
  if (anomalous < ticc.run_window)
    throw ConfigError("run_trial: the anomalous run must be preceded by at least "
                      "run_window normal runs");

  RunDataset warmup;
  warmup.sensor_names = result.data.sensor_names;
  for (Index r = 0; r < ticc.run_window; ++r) {
    warmup.runs.push_back(result.data.runs[static_cast<std::size_t>(r)]);
    warmup.run_ids.push_back(result.data.run_ids[static_cast<std::size_t>(r)]);
  }
  const StandardizationStats stats = standardize(warmup).second;
  const RunDataset standardized = standardize(result.data, stats).first;

  std::vector<Matrix> profile_runs;
  std::vector<std::string> profile_ids;
  for (Index r = anomalous - ticc.run_window; r < anomalous; ++r) {
    profile_runs.push_back(standardized.runs[static_cast<std::size_t>(r)]);
    profile_ids.push_back(standardized.run_ids[static_cast<std::size_t>(r)]);
  }
  const Profile old_profile = fit_profile(profile_runs, profile_ids, ticc);
  const RankOutput ranked = rank_run(
      old_profile, standardized.runs[static_cast<std::size_t>(anomalous)], scoring);

  std::vector<Index> order;
  order.reserve(ranked.ranking.size());
  for (const auto& [sensor, score] : ranked.ranking) order.push_back(sensor);
  const std::set<Index> truth(result.truth.root_sensors.begin(),
                              result.truth.root_sensors.end());

  TrialMetrics metrics;
  const auto pr = precision_recall_at_k(order, truth, resolve_top_k(eval, truth.size()));
  metrics.precision = pr.precision;
  metrics.recall = pr.recall;
  metrics.ndcg = ndcg_at_p(order, truth, resolve_ndcg_p(eval, truth.size()));
  return metrics;
}

}  // namespace causalrank

// Command-line front end: synth, fit, monitor, rank, sweep, eval.
// Exit codes: 0 success, 1 runtime failure, 2 configuration error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "causalrank/config.hpp"
#include "causalrank/errors.hpp"
#include "causalrank/io.hpp"
#include "causalrank/pipeline.hpp"
#include "causalrank/sweep.hpp"

namespace {

using namespace causalrank;

struct CommonArgs {
  std::optional<std::filesystem::path> config_file;
  std::vector<std::string> overrides;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> data;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_file, "JSON configuration file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", args.overrides,
                  "Override a config field, e.g. --set ticc.num_clusters=4");
  cmd->add_option("--out", args.out, "Output directory");
  cmd->add_option("--seed", args.seed, "Master random seed");
  cmd->add_option("--data", args.data, "Input data CSV (overrides data.csv)");
}

PipelineConfig resolve_config(const CommonArgs& args) {
  PipelineConfig config = load_config(args.config_file, args.overrides);
  if (args.out) config.out = *args.out;
  if (args.seed) config.seed = *args.seed;
  if (args.data) config.data_csv = *args.data;
  config.finalize();
  return config;
}

RunDataset load_input(const PipelineConfig& config) {
  if (config.data_csv.empty())
    throw ConfigError("no input data: set data.csv in the config or pass --data");
  return load_runs(config.data_csv);
}

void write_rank_outputs(const PipelineConfig& config, const RankOutput& ranked,
                        const std::vector<std::string>& sensor_names,
                        const std::string& run_id) {
  std::filesystem::create_directories(config.out);
  write_point_scores_csv(ranked.scores.point_scores, sensor_names,
                         config.out / "point_scores.csv");
  write_point_scores_csv(ranked.scores.propagated, sensor_names,
                         config.out / "propagated_scores.csv");
  nlohmann::json doc;
  doc["run_id"] = run_id;
  doc["ranking"] = ranking_to_json(ranked.ranking, sensor_names);
  doc["solver_converged"] = ranked.solver_converged;
  write_json_file(config.out / "ranking.json", doc);
}

int cmd_synth(const CommonArgs& args) {
  PipelineConfig config = resolve_config(args);
  config.synth.validate();
  const SynthResult result = generate(config.synth);
  std::filesystem::create_directories(config.out);
  write_run_csv(result.data, config.out / "data.csv");
  write_json_file(config.out / "ground_truth.json",
                  ground_truth_to_json(result.truth, config.synth,
                                       result.data.sensor_names, result.data.run_ids));
  std::cout << "wrote " << (config.out / "data.csv").string() << " ("
            << result.data.run_count() << " runs x " << result.data.sensor_count()
            << " sensors x " << result.data.time_count() << " timestamps)\n";
  return 0;
}

int cmd_fit(const CommonArgs& args) {
  PipelineConfig config = resolve_config(args);
  const RunDataset raw = load_input(config);
  if (raw.run_count() < config.ticc.run_window)
    throw ConfigError("fit needs at least run_window (" +
                      std::to_string(config.ticc.run_window) + ") runs");

  const auto [standardized, stats] = standardize(raw);
  std::vector<Matrix> runs;
  std::vector<std::string> ids;
  for (Index r = raw.run_count() - config.ticc.run_window; r < raw.run_count(); ++r) {
    runs.push_back(standardized.runs[static_cast<std::size_t>(r)]);
    ids.push_back(standardized.run_ids[static_cast<std::size_t>(r)]);
  }
  const Profile profile = fit_profile(runs, ids, config.ticc);

  std::filesystem::create_directories(config.out);
  write_json_file(config.out / "profile.json", profile_to_json(profile));
  write_json_file(config.out / "stats.json",
                  stats_to_json(stats, raw.sensor_names));
  std::cout << "fitted profile over runs";
  for (const auto& id : ids) std::cout << ' ' << id;
  std::cout << " (" << profile.clustering.objective_trace.size() << " EM iterations)\n";
  return 0;
}

nlohmann::json monitor_state_json(const PipelineConfig& config,
                                  const MonitorOutcome& outcome,
                                  const std::vector<std::string>& sensor_names) {
  nlohmann::json state;
  state["stats"] = stats_to_json(outcome.stats, sensor_names);
  state["sensor_names"] = sensor_names;
  state["params"] = ticc_params_to_json(config.ticc);
  state["final_old_profile"] = outcome.final_old_profile
                                   ? profile_to_json(*outcome.final_old_profile)
                                   : nlohmann::json();
  state["final_new_profile"] = outcome.final_new_profile
                                   ? profile_to_json(*outcome.final_new_profile)
                                   : nlohmann::json();
  if (outcome.anomalous_run_id) {
    state["anomalous"] = {{"run_id", *outcome.anomalous_run_id},
                          {"old_profile", profile_to_json(*outcome.anomalous_old_profile)}};
  } else {
    state["anomalous"] = nlohmann::json();
  }
  return state;
}

int cmd_monitor(const CommonArgs& args, bool no_rank) {
  PipelineConfig config = resolve_config(args);
  const RunDataset raw = load_input(config);
  const MonitorOutcome outcome = run_monitor(raw, config.ticc, config.threshold);

  for (const auto& report : outcome.reports)
    std::cout << "run " << report.run_id << ": "
              << (report.anomalous ? "anomalous" : "normal")
              << " score=" << report.score << " threshold=" << report.threshold << '\n';

  std::filesystem::create_directories(config.out);
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& report : outcome.reports) reports.push_back(report_to_json(report));
  write_json_file(config.out / "reports.json", reports);
  write_json_file(config.out / "monitor_state.json",
                  monitor_state_json(config, outcome, raw.sensor_names));

  if (outcome.anomalous_run_id && !no_rank) {
    const auto it = std::find(raw.run_ids.begin(), raw.run_ids.end(),
                              *outcome.anomalous_run_id);
    const auto idx = static_cast<Index>(it - raw.run_ids.begin());
    const Matrix standardized_run =
        standardize(raw, outcome.stats).first.runs[static_cast<std::size_t>(idx)];
    const RankOutput ranked =
        rank_run(*outcome.anomalous_old_profile, standardized_run, config.scoring);
    write_rank_outputs(config, ranked, raw.sensor_names, *outcome.anomalous_run_id);
    std::cout << "ranked causal anomalies for run " << *outcome.anomalous_run_id
              << " -> " << (config.out / "ranking.json").string() << '\n';
  }
  return 0;
}

int cmd_rank(const CommonArgs& args, const std::string& run_arg) {
  PipelineConfig config = resolve_config(args);
  const RunDataset raw = load_input(config);

  const auto state_path = config.out / "monitor_state.json";
  if (!std::filesystem::exists(state_path))
    throw StateError("no monitor state at " + state_path.string() +
                     "; run `monitor` first");
  const nlohmann::json state = read_json_file(state_path);
  const auto sensor_names = state.at("sensor_names").get<std::vector<std::string>>();
  const StandardizationStats stats = stats_from_json(state.at("stats"), sensor_names);

  // Default to the recorded anomalous run, else the most recent run.
  std::string run_id = run_arg;
  if (run_id.empty()) {
    if (!state.at("anomalous").is_null())
      run_id = state.at("anomalous").at("run_id").get<std::string>();
    else
      run_id = raw.run_ids.back();
  }

  std::optional<Profile> reference;
  if (!state.at("anomalous").is_null() &&
      state.at("anomalous").at("run_id").get<std::string>() == run_id)
    reference = profile_from_json(state.at("anomalous").at("old_profile"));
  else if (!state.at("final_new_profile").is_null() &&
           profile_from_json(state.at("final_new_profile")).run_ids.back() == run_id &&
           !state.at("final_old_profile").is_null())
    reference = profile_from_json(state.at("final_old_profile"));
  if (!reference)
    throw StateError("monitor state holds no profile preceding run '" + run_id + "'");

  const auto it = std::find(raw.run_ids.begin(), raw.run_ids.end(), run_id);
  if (it == raw.run_ids.end())
    throw DataError("run '" + run_id + "' not present in the input data");
  const auto idx = static_cast<Index>(it - raw.run_ids.begin());
  const Matrix standardized_run =
      standardize(raw, stats).first.runs[static_cast<std::size_t>(idx)];

  const RankOutput ranked = rank_run(*reference, standardized_run, config.scoring);
  write_rank_outputs(config, ranked, raw.sensor_names, run_id);
  std::cout << "ranked causal anomalies for run " << run_id << " -> "
            << (config.out / "ranking.json").string() << '\n';
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  PipelineConfig config = resolve_config(args);
  const SweepResult result = run_sweep(config);

  std::filesystem::create_directories(config.out);
  const std::string stem = "sweep_" + result.param;
  write_sweep_csv(result, config.out / (stem + ".csv"));
  write_json_file(config.out / (stem + "_summary.json"), sweep_summary_json(result));
  for (const auto& trace : result.traces)
    write_convergence_csv(
        trace, config.out / ("convergence_seed" + std::to_string(trace.seed) + ".csv"));

  std::cout << result.param << " sweep: " << result.records.size() << " trials, "
            << result.failures << " failures -> "
            << (config.out / (stem + ".csv")).string() << '\n';
  return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& ranking_arg,
             const std::string& truth_arg) {
  PipelineConfig config = resolve_config(args);
  const std::filesystem::path ranking_path =
      ranking_arg.empty() ? config.out / "ranking.json" : std::filesystem::path(ranking_arg);
  const std::filesystem::path truth_path =
      truth_arg.empty()
          ? (config.ground_truth.empty() ? config.out / "ground_truth.json"
                                         : config.ground_truth)
          : std::filesystem::path(truth_arg);

  const nlohmann::json ranking_doc = read_json_file(ranking_path);
  const auto ranked_names = ranking_sensors_from_json(ranking_doc.at("ranking"));
  const GroundTruthInfo truth = ground_truth_info_from_json(read_json_file(truth_path));
  if (truth.root_sensors.empty())
    throw DataError("ground truth lists no root-cause sensors");

  // Metrics work on indices; map names through the ranking order.
  std::vector<Index> order(ranked_names.size());
  for (std::size_t i = 0; i < ranked_names.size(); ++i) order[i] = static_cast<Index>(i);
  std::set<Index> truth_set;
  for (const auto& name : truth.root_sensors) {
    const auto it = std::find(ranked_names.begin(), ranked_names.end(), name);
    if (it == ranked_names.end())
      throw DataError("ground-truth sensor '" + name + "' missing from the ranking");
    truth_set.insert(static_cast<Index>(it - ranked_names.begin()));
  }

  const int k = resolve_top_k(config.eval, truth_set.size());
  const int p = resolve_ndcg_p(config.eval, truth_set.size());
  const auto pr = precision_recall_at_k(order, truth_set, k);
  const Scalar ndcg = ndcg_at_p(order, truth_set, p);

  nlohmann::json doc = {{"precision", pr.precision}, {"recall", pr.recall},
                        {"ndcg", ndcg},             {"k", k},
                        {"p", p},                   {"truth", truth.root_sensors}};
  std::filesystem::create_directories(config.out);
  write_json_file(config.out / "metrics.json", doc);
  std::cout << "precision@" << k << "=" << pr.precision << " recall@" << k << "="
            << pr.recall << " ndcg@" << p << "=" << ndcg << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal anomaly detection and ranking for multi-run sensor data"};
  app.require_subcommand(1);

  CommonArgs synth_args, fit_args, monitor_args, rank_args, sweep_args, eval_args;
  bool no_rank = false;
  std::string rank_run_id, eval_ranking, eval_truth;

  auto* synth = app.add_subcommand("synth", "Generate synthetic multi-run data");
  add_common(synth, synth_args);
  auto* fit = app.add_subcommand("fit", "Fit a profile on the latest run window");
  add_common(fit, fit_args);
  auto* monitor =
      app.add_subcommand("monitor", "Replay runs, compare profiles, flag anomalies");
  add_common(monitor, monitor_args);
  monitor->add_flag("--no-rank", no_rank, "Do not rank anomalies automatically");
  auto* rank = app.add_subcommand("rank", "Rank causal anomalies for a run");
  add_common(rank, rank_args);
  rank->add_option("--run", rank_run_id, "Run id to score (default: recorded anomalous run)");
  auto* sweep = app.add_subcommand("sweep", "Run a synthetic experiment sweep");
  add_common(sweep, sweep_args);
  auto* eval = app.add_subcommand("eval", "Score a ranking against ground truth");
  add_common(eval, eval_args);
  eval->add_option("--ranking", eval_ranking, "Ranking JSON (default: <out>/ranking.json)");
  eval->add_option("--truth", eval_truth, "Ground truth JSON (default: <out>/ground_truth.json)");

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return cmd_synth(synth_args);
    if (fit->parsed()) return cmd_fit(fit_args);
    if (monitor->parsed()) return cmd_monitor(monitor_args, no_rank);
    if (rank->parsed()) return cmd_rank(rank_args, rank_run_id);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    if (eval->parsed()) return cmd_eval(eval_args, eval_ranking, eval_truth);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

#include "causalrank/sweep.hpp"

#include <cmath>

#include "causalrank/errors.hpp"
#include "causalrank/parallel.hpp"
#include "causalrank/random.hpp"

namespace causalrank {

SweepExperiment experiment_from_string(const std::string& name) {
  if (name == "states") return SweepExperiment::States;
  if (name == "cross_time_lag") return SweepExperiment::CrossTimeLag;
  if (name == "noise_ratio") return SweepExperiment::NoiseRatio;
  if (name == "convergence") return SweepExperiment::Convergence;
  throw ConfigError("unknown sweep experiment '" + name + "'");
}

SweepMethod method_from_string(const std::string& name) {
  if (name == "full") return SweepMethod::Full;
  if (name == "single_state") return SweepMethod::SingleState;
  if (name == "single_lag") return SweepMethod::SingleLag;
  if (name == "no_propagation") return SweepMethod::NoPropagation;
  throw ConfigError("unknown sweep method '" + name + "'");
}

std::string to_string(SweepExperiment experiment) {
  switch (experiment) {
    case SweepExperiment::States: return "states";
    case SweepExperiment::CrossTimeLag: return "cross_time_lag";
    case SweepExperiment::NoiseRatio: return "noise_ratio";
    case SweepExperiment::Convergence: return "convergence";
  }
  return "?";
}

std::string to_string(SweepMethod method) {
  switch (method) {
    case SweepMethod::Full: return "full";
    case SweepMethod::SingleState: return "single_state";
    case SweepMethod::SingleLag: return "single_lag";
    case SweepMethod::NoPropagation: return "no_propagation";
  }
  return "?";
}

namespace {

struct TrialSetup {
  SynthConfig synth;
  TiccParams ticc;
  ScoringParams scoring;
};

TrialSetup trial_setup(const PipelineConfig& base, SweepExperiment experiment,
                       Scalar value, SweepMethod method, std::uint64_t seed) {
  TrialSetup setup{base.synth, base.ticc, base.scoring};
  setup.synth.seed = derive_seed(seed, "synth");
  setup.ticc.seed = derive_seed(seed, "ticc");
  setup.ticc.threads = 1;
  setup.scoring.threads = 1;

  switch (experiment) {
    case SweepExperiment::States: {
      const int states = static_cast<int>(std::lround(value));
      setup.synth.clusters = states;
      setup.synth.segments.clear();
      setup.ticc.num_clusters = states;
      break;
    }
    case SweepExperiment::CrossTimeLag: {
      const auto lag = static_cast<Index>(std::lround(value));
      setup.synth.max_lag = lag;
      setup.synth.window_size = std::max(base.synth.window_size, lag + 1);
      break;
    }
    case SweepExperiment::NoiseRatio:
      setup.synth.noise_ratio = value;
      break;
    case SweepExperiment::Convergence:
      break;
  }

  switch (method) {
    case SweepMethod::Full:
      break;
    case SweepMethod::SingleState:
      setup.ticc.num_clusters = 1;
      break;
    case SweepMethod::SingleLag:
      setup.ticc.window_size = 1;
      break;
    case SweepMethod::NoPropagation:
      setup.scoring.propagation_factor = 0.0;
      break;
  }
  return setup;
}

// One representative reconstruction solve (middle window of the anomalous
// run) with its full objective trace.
ConvergenceTrace convergence_trace(const PipelineConfig& base, std::uint64_t seed) {
  TrialSetup setup = trial_setup(base, SweepExperiment::Convergence, 0.0,
                                 SweepMethod::Full, seed);
  const SynthResult result = generate(setup.synth);
  const Index anomalous = result.truth.anomalous_run;

  RunDataset warmup;
  warmup.sensor_names = result.data.sensor_names;
  for (Index r = 0; r < setup.ticc.run_window; ++r) {
    warmup.runs.push_back(result.data.runs[static_cast<std::size_t>(r)]);
    warmup.run_ids.push_back(result.data.run_ids[static_cast<std::size_t>(r)]);
  }
  const StandardizationStats stats = standardize(warmup).second;
  const RunDataset standardized = standardize(result.data, stats).first;

  std::vector<Matrix> profile_runs;
  std::vector<std::string> profile_ids;
  for (Index r = anomalous - setup.ticc.run_window; r < anomalous; ++r) {
    profile_runs.push_back(standardized.runs[static_cast<std::size_t>(r)]);
    profile_ids.push_back(standardized.run_ids[static_cast<std::size_t>(r)]);
  }
  const Profile old_profile = fit_profile(profile_runs, profile_ids, setup.ticc);
  const AveragedProfile reference = build_averaged_profile(old_profile);
  const ClusteringResult refit = refit_anomalous_run(
      old_profile, standardized.runs[static_cast<std::size_t>(anomalous)]);

  const Index middle =
      reference.first_end_time + static_cast<Index>(reference.mrfs.size()) / 2;
  const Matrix& ground_truth = reference.at(middle);
  const Matrix& observed =
      refit.models[static_cast<std::size_t>(refit.cluster_of(middle, 0) - 1)].precision;
  const BrokenNetworkPair pair = build_broken_network(
      ground_truth, observed, setup.scoring.vanish_ratio, setup.scoring.edge_floor);
  const auto op = propagation_operator(normalize_adjacency(ground_truth),
                                       setup.scoring.propagation_factor);
  ScoreSolverOptions options = setup.scoring.solver;
  options.record_trace = true;
  const WindowScores scores =
      solve_window_scores(op, pair, setup.scoring.l1_weight, options);

  ConvergenceTrace trace;
  trace.seed = seed;
  trace.objective = scores.objective_trace;
  return trace;
}

}  // namespace

SweepResult run_sweep(const PipelineConfig& base) {
  const SweepExperiment experiment = experiment_from_string(base.sweep.experiment);
  if (base.sweep.seeds.empty()) throw ConfigError("sweep.seeds must be non-empty");

  SweepResult result;
  result.param = to_string(experiment);

  if (experiment == SweepExperiment::Convergence) {
    result.traces.resize(base.sweep.seeds.size());
    std::vector<TrialRecord> records(base.sweep.seeds.size());
    parallel_for(static_cast<Index>(base.sweep.seeds.size()), base.threads, [&](Index i) {
      const std::uint64_t seed = base.sweep.seeds[static_cast<std::size_t>(i)];
      auto& record = records[static_cast<std::size_t>(i)];
      record.param = result.param;
      record.method = to_string(SweepMethod::Full);
      record.seed = seed;
      try {
        result.traces[static_cast<std::size_t>(i)] = convergence_trace(base, seed);
      } catch (const std::exception& e) {
        record.failed = true;
        record.error = e.what();
      }
    });
    for (auto& r : records) {
      if (r.failed) ++result.failures;
      result.records.push_back(std::move(r));
    }
    return result;
  }

  if (base.sweep.grid.empty()) throw ConfigError("sweep.grid must be non-empty");
  if (base.sweep.methods.empty()) throw ConfigError("sweep.methods must be non-empty");

  std::vector<SweepMethod> methods;
  for (const auto& name : base.sweep.methods) methods.push_back(method_from_string(name));

  struct Spec {
    Scalar value;
    SweepMethod method;
    std::uint64_t seed;
  };
  std::vector<Spec> specs;
  for (const Scalar value : base.sweep.grid)
    for (const SweepMethod method : methods)
      for (const std::uint64_t seed : base.sweep.seeds)
        specs.push_back({value, method, seed});

  std::vector<TrialRecord> records(specs.size());
  parallel_for(static_cast<Index>(specs.size()), base.threads, [&](Index i) {
    const Spec& spec = specs[static_cast<std::size_t>(i)];
    auto& record = records[static_cast<std::size_t>(i)];
    record.param = result.param;
    record.value = spec.value;
    record.method = to_string(spec.method);
    record.seed = spec.seed;
    try {
      const TrialSetup setup =
          trial_setup(base, experiment, spec.value, spec.method, spec.seed);
      record.metrics = run_trial(setup.synth, setup.ticc, setup.scoring, base.eval);
    } catch (const std::exception& e) {
      record.failed = true;
      record.error = e.what();
    }
  });

  for (auto& r : records) {
    if (r.failed) ++result.failures;
    result.records.push_back(std::move(r));
  }
  return result;
}

}  // namespace causalrank

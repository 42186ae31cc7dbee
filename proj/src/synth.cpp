#include "causalrank/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "causalrank/errors.hpp"
#include "causalrank/linalg.hpp"
#include "causalrank/random.hpp"
#include "causalrank/scoring.hpp"

namespace causalrank {

namespace {
constexpr Scalar kPdMargin = 0.1;
constexpr Scalar kWeightLo = 0.3;
constexpr Scalar kWeightHi = 1.0;
}  // namespace

std::vector<int> SynthConfig::schedule() const {
  std::vector<int> ids = segments;
  if (ids.empty())
    for (int k = 1; k <= clusters; ++k) ids.push_back(k);
  const auto seg_count = static_cast<Index>(ids.size());
  std::vector<int> out(static_cast<std::size_t>(time_steps));
  for (Index t = 0; t < time_steps; ++t) {
    auto seg = std::min(t * seg_count / time_steps, seg_count - 1);
    out[static_cast<std::size_t>(t)] = ids[static_cast<std::size_t>(seg)];
  }
  return out;
}

Index SynthConfig::resolved_anomalous_run() const {
  return anomalous_run >= 0 ? anomalous_run : runs - 1;
}

std::pair<Index, Index> SynthConfig::resolved_interval() const {
  const Index lo = std::max<Index>(1, anomaly_interval.first);
  const Index hi = anomaly_interval.second >= 1
                       ? std::min(anomaly_interval.second, time_steps)
                       : time_steps;
  return {lo, hi};
}

void SynthConfig::validate() const {
  if (sensors < 1) throw ConfigError("sensors must be >= 1");
  if (time_steps < 1) throw ConfigError("time_steps must be >= 1");
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (clusters < 1) throw ConfigError("clusters must be >= 1");
  if (window_size < 1 || window_size > time_steps)
    throw ConfigError("window_size must lie in 1..time_steps");
  if (max_lag < 0 || max_lag > window_size - 1)
    throw ConfigError("max_lag must lie in 0..window_size-1");
  if (edge_prob < 0.0 || edge_prob >= 1.0)
    throw ConfigError("edge_prob must lie in [0, 1)");
  if (anomaly_count < 0 || static_cast<Index>(anomaly_count) > sensors)
    throw ConfigError("anomaly_count must lie in 0..sensors");
  if (noise_ratio < 0.0) throw ConfigError("noise_ratio must be >= 0");
  if (anomaly_amplitude < 0.0) throw ConfigError("anomaly_amplitude must be >= 0");
  if (propagation_factor < 0.0 || propagation_factor >= 1.0)
    throw ConfigError("propagation_factor must lie in [0, 1)");
  if (anomalous_run >= runs) throw ConfigError("anomalous_run must be < runs");
  for (int id : segments)
    if (id < 1 || id > clusters)
      throw ConfigError("segments entries must name clusters 1..clusters");
}

std::vector<ClusterModel> generate_mrfs(const SynthConfig& cfg) {
  cfg.validate();
  const Index n = cfg.sensors * cfg.window_size;

  std::vector<ClusterModel> models;
  models.reserve(static_cast<std::size_t>(cfg.clusters));
  for (int k = 0; k < cfg.clusters; ++k) {
    Rng rng(derive_seed(cfg.seed, "synth.mrfs." + std::to_string(k)));

    // Directed Erdos-Renyi over index pairs within the lag budget.
    Matrix directed = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const Index lag = std::abs(i / cfg.sensors - j / cfg.sensors);
        if (lag > cfg.max_lag) continue;
        if (rng.uniform() < cfg.edge_prob) directed(i, j) = 1.0;
      }
    }

    Matrix a = Matrix::Identity(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        if (directed(i, j) == 0.0 && directed(j, i) == 0.0) continue;
        Scalar w = rng.uniform(kWeightLo, kWeightHi);
        if (rng.uniform() < 0.5) w = -w;
        a(i, j) = w;
        a(j, i) = w;
      }
    }

    a = block_toeplitz_project(a, cfg.sensors);
    a = ensure_min_eigenvalue(std::move(a), kPdMargin);

    ClusterModel model;
    model.precision = std::move(a);
    model.mean = Vector::Zero(n);
    model.cluster_id = k + 1;
    models.push_back(std::move(model));
  }
  return models;
}

namespace {

// Cholesky factors needed to sample one run under switching clusters.
struct ClusterSampler {
  Eigen::LLT<Matrix> joint;     // of the full window precision
  Eigen::LLT<Matrix> newest;    // of the newest-block conditional precision
  Matrix cross;                 // precision block (newest, past)

  explicit ClusterSampler(const Matrix& precision, Index sensors, Index window) {
    joint.compute(precision);
    if (joint.info() != Eigen::Success)
      throw DefinitenessError("planted precision is not positive definite");
    const Index past = (window - 1) * sensors;
    const Matrix a_nn = precision.block(past, past, sensors, sensors);
    cross = precision.block(past, 0, sensors, past);
    newest.compute(a_nn);
    if (newest.info() != Eigen::Success)
      throw DefinitenessError("conditional precision is not positive definite");
  }
};

// x with cov = A^{-1}: draw z ~ N(0, I), solve L' x = z for A = L L'.
Vector sample_from_precision(const Eigen::LLT<Matrix>& llt, Rng& rng) {
  Vector z(llt.matrixL().rows());
  for (Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return llt.matrixU().solve(z);
}

}  // namespace

SynthResult generate_series(const std::vector<ClusterModel>& models,
                            const std::vector<int>& schedule, const SynthConfig& cfg) {
  cfg.validate();
  if (static_cast<Index>(schedule.size()) != cfg.time_steps)
    throw ConfigError("schedule must cover every timestamp");
  const Index n_sensors = cfg.sensors;
  const Index window = cfg.window_size;

  std::vector<ClusterSampler> samplers;
  samplers.reserve(models.size());
  for (const auto& m : models) samplers.emplace_back(m.precision, n_sensors, window);

  SynthResult out;
  out.truth.models = models;
  out.truth.assignments = schedule;
  out.data.sensor_names.reserve(static_cast<std::size_t>(n_sensors));
  for (Index s = 0; s < n_sensors; ++s)
    out.data.sensor_names.push_back("s" + std::to_string(s + 1));

  for (Index r = 0; r < cfg.runs; ++r) {
    Rng rng(derive_seed(cfg.seed, "synth.series." + std::to_string(r)));
    Matrix run(n_sensors, cfg.time_steps);

    const int first_cluster = schedule[0] - 1;
    const Vector head = sample_from_precision(
        samplers[static_cast<std::size_t>(first_cluster)].joint, rng);
    for (Index j = 0; j < window && j < cfg.time_steps; ++j)
      run.col(j) = head.segment(j * n_sensors, n_sensors);

    for (Index t = window; t < cfg.time_steps; ++t) {
      const auto& sampler =
          samplers[static_cast<std::size_t>(schedule[static_cast<std::size_t>(t)] - 1)];
      // Conditional mean of the newest block given the trailing history:
      // -A_nn^{-1} A_np x_past.
      Vector past((window - 1) * n_sensors);
      for (Index j = 0; j < window - 1; ++j)
        past.segment(j * n_sensors, n_sensors) = run.col(t - (window - 1) + j);
      Vector mean = Vector::Zero(n_sensors);
      if (window > 1) mean = -sampler.newest.solve(sampler.cross * past);
      run.col(t) = mean + sample_from_precision(sampler.newest, rng);
    }

    out.data.runs.push_back(std::move(run));
    out.data.run_ids.push_back(std::to_string(r + 1));
  }

  if (cfg.noise_ratio > 0.0) {
    const Scalar total =
        static_cast<Scalar>(cfg.runs) * static_cast<Scalar>(cfg.time_steps);
    Vector sum = Vector::Zero(n_sensors);
    Vector sum_sq = Vector::Zero(n_sensors);
    for (const auto& run : out.data.runs) {
      sum += run.rowwise().sum();
      sum_sq += run.array().square().matrix().rowwise().sum();
    }
    const Vector mean = sum / total;
    const Vector sigma =
        (sum_sq / total - mean.array().square().matrix()).cwiseMax(0.0).cwiseSqrt();
    Rng rng(derive_seed(cfg.seed, "synth.noise"));
    for (auto& run : out.data.runs)
      for (Index s = 0; s < n_sensors; ++s)
        for (Index t = 0; t < cfg.time_steps; ++t)
          run(s, t) += cfg.noise_ratio * sigma(s) * rng.normal();
  }

  return out;
}

SynthResult inject_anomalies(SynthResult base, const SynthConfig& cfg) {
  cfg.validate();
  if (cfg.anomaly_count < 1)
    throw ConfigError("anomaly_count must be >= 1 to inject anomalies");

  Rng rng(derive_seed(cfg.seed, "synth.anomaly"));
  std::vector<Index> roots =
      rng.sample_without_replacement(cfg.sensors, cfg.anomaly_count);
  std::sort(roots.begin(), roots.end());

  const Index n = cfg.sensors * cfg.window_size;
  Vector indicator = Vector::Zero(n);
  for (Index root : roots)
    for (Index j = 0; j < cfg.window_size; ++j) indicator(j * cfg.sensors + root) = 1.0;

  // Per-sensor propagated weight for every planted cluster.
  std::vector<Vector> planted_b;
  Matrix bbar(cfg.sensors, static_cast<Index>(base.truth.models.size()));
  for (std::size_t k = 0; k < base.truth.models.size(); ++k) {
    const auto adjacency = normalize_adjacency(base.truth.models[k].precision);
    const auto op = propagation_operator(adjacency, cfg.propagation_factor);
    const Vector b = fault_propagate(op, indicator);
    planted_b.push_back(b);
    for (Index s = 0; s < cfg.sensors; ++s) {
      Scalar best = 0.0;
      for (Index j = 0; j < cfg.window_size; ++j)
        best = std::max(best, b(j * cfg.sensors + s));
      bbar(s, static_cast<Index>(k)) = best;
    }
  }

  const Index run = cfg.resolved_anomalous_run();
  const auto [lo, hi] = cfg.resolved_interval();
  Matrix& target = base.data.runs[static_cast<std::size_t>(run)];
  const auto schedule = base.truth.assignments;
  for (Index t = lo; t <= hi; ++t) {
    const int k = schedule[static_cast<std::size_t>(t - 1)] - 1;
    for (Index s = 0; s < cfg.sensors; ++s)
      target(s, t - 1) *= 1.0 + cfg.anomaly_amplitude * bbar(s, k);
  }

  base.truth.root_sensors = std::move(roots);
  base.truth.planted_b = std::move(planted_b);
  base.truth.anomalous_run = run;
  return base;
}

SynthResult generate(const SynthConfig& cfg) {
  const auto models = generate_mrfs(cfg);
  SynthResult result = generate_series(models, cfg.schedule(), cfg);
  if (cfg.anomaly_count > 0) result = inject_anomalies(std::move(result), cfg);
  return result;
}

}  // namespace causalrank

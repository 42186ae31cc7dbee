#include "causalrank/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "causalrank/errors.hpp"

namespace causalrank {

namespace {

using nlohmann::json;

std::string format_real(Scalar v, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path.string());
  return out;
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError(path.string() + " is not valid JSON: " + e.what());
  }
  return doc;
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

void write_run_csv(const RunDataset& data, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "run,timestamp";
  for (const auto& name : data.sensor_names) out << ',' << name;
  out << '\n';
  for (Index r = 0; r < data.run_count(); ++r) {
    const Matrix& run = data.runs[static_cast<std::size_t>(r)];
    for (Index t = 0; t < data.time_count(); ++t) {
      out << data.run_ids[static_cast<std::size_t>(r)] << ',' << (t + 1);
      for (Index s = 0; s < data.sensor_count(); ++s)
        out << ',' << format_real(run(s, t));
      out << '\n';
    }
  }
}

void write_point_scores_csv(const Matrix& scores,
                            const std::vector<std::string>& sensor_names,
                            const std::filesystem::path& path) {
  if (scores.rows() != static_cast<Index>(sensor_names.size()))
    throw Error("write_point_scores_csv: sensor name count mismatch");
  auto out = open_out(path);
  out << "timestamp";
  for (const auto& name : sensor_names) out << ',' << name;
  out << '\n';
  for (Index t = 0; t < scores.cols(); ++t) {
    out << (t + 1);
    for (Index s = 0; s < scores.rows(); ++s) out << ',' << format_real(scores(s, t), 12);
    out << '\n';
  }
}

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "param,value,method,seed,precision,recall,ndcg\n";
  for (const auto& r : result.records) {
    if (r.failed) continue;
    out << r.param << ',' << format_real(r.value, 12) << ',' << r.method << ','
        << r.seed << ',' << format_real(r.metrics.precision, 12) << ','
        << format_real(r.metrics.recall, 12) << ','
        << format_real(r.metrics.ndcg, 12) << '\n';
  }
}

nlohmann::json sweep_summary_json(const SweepResult& result) {
  json summary;
  summary["param"] = result.param;
  summary["failures"] = result.failures;

  json errors = json::array();
  for (const auto& r : result.records)
    if (r.failed)
      errors.push_back({{"value", r.value},
                        {"method", r.method},
                        {"seed", r.seed},
                        {"error", r.error}});
  summary["errors"] = errors;

  // Mean/stddev over seeds per (value, method) cell.
  std::map<std::pair<Scalar, std::string>, std::vector<TrialMetrics>> cells;
  for (const auto& r : result.records)
    if (!r.failed) cells[{r.value, r.method}].push_back(r.metrics);

  json aggregates = json::array();
  for (const auto& [key, metrics] : cells) {
    const auto n = static_cast<Scalar>(metrics.size());
    TrialMetrics mean;
    for (const auto& m : metrics) {
      mean.precision += m.precision / n;
      mean.recall += m.recall / n;
      mean.ndcg += m.ndcg / n;
    }
    Scalar var = 0.0;
    for (const auto& m : metrics) var += (m.ndcg - mean.ndcg) * (m.ndcg - mean.ndcg) / n;
    aggregates.push_back({{"value", key.first},
                          {"method", key.second},
                          {"trials", metrics.size()},
                          {"mean_precision", mean.precision},
                          {"mean_recall", mean.recall},
                          {"mean_ndcg", mean.ndcg},
                          {"stddev_ndcg", std::sqrt(var)}});
  }
  summary["aggregates"] = aggregates;
  return summary;
}

void write_convergence_csv(const ConvergenceTrace& trace,
                           const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "iteration,objective\n";
  for (std::size_t i = 0; i < trace.objective.size(); ++i)
    out << i << ',' << format_real(trace.objective[i]) << '\n';
}

json stats_to_json(const StandardizationStats& stats,
                   const std::vector<std::string>& sensor_names) {
  if (stats.mean.size() != static_cast<Index>(sensor_names.size()))
    throw Error("stats_to_json: sensor name count mismatch");
  json doc;
  for (std::size_t i = 0; i < sensor_names.size(); ++i)
    doc[sensor_names[i]] = {{"mean", stats.mean(static_cast<Index>(i))},
                            {"stddev", stats.stddev(static_cast<Index>(i))}};
  return doc;
}

StandardizationStats stats_from_json(const json& doc,
                                     const std::vector<std::string>& sensor_names) {
  StandardizationStats stats;
  const auto n = static_cast<Index>(sensor_names.size());
  stats.mean.resize(n);
  stats.stddev.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& name = sensor_names[static_cast<std::size_t>(i)];
    if (!doc.contains(name))
      throw DataError("standardization stats missing sensor '" + name + "'");
    stats.mean(i) = doc.at(name).at("mean").get<Scalar>();
    stats.stddev(i) = doc.at(name).at("stddev").get<Scalar>();
  }
  return stats;
}

json ticc_params_to_json(const TiccParams& p) {
  return {{"num_clusters", p.num_clusters},
          {"sparsity", p.sparsity},
          {"switch_penalty", p.switch_penalty},
          {"cross_run_penalty", p.cross_run_penalty},
          {"window_size", p.window_size},
          {"run_window", p.run_window},
          {"max_em_iters", p.max_em_iters},
          {"em_tol", p.em_tol},
          {"restarts", p.restarts},
          {"seed", p.seed}};
}

TiccParams ticc_params_from_json(const json& doc) {
  TiccParams p;
  p.num_clusters = doc.at("num_clusters").get<int>();
  p.sparsity = doc.at("sparsity").get<Scalar>();
  p.switch_penalty = doc.at("switch_penalty").get<Scalar>();
  p.cross_run_penalty = doc.at("cross_run_penalty").get<Scalar>();
  p.window_size = doc.at("window_size").get<Index>();
  p.run_window = doc.at("run_window").get<Index>();
  p.max_em_iters = doc.at("max_em_iters").get<int>();
  p.em_tol = doc.at("em_tol").get<Scalar>();
  p.restarts = doc.at("restarts").get<int>();
  p.seed = doc.at("seed").get<std::uint64_t>();
  return p;
}

json synth_config_to_json(const SynthConfig& cfg) {
  return {{"sensors", cfg.sensors},
          {"time_steps", cfg.time_steps},
          {"runs", cfg.runs},
          {"clusters", cfg.clusters},
          {"window_size", cfg.window_size},
          {"max_lag", cfg.max_lag},
          {"edge_prob", cfg.edge_prob},
          {"segments", cfg.segments},
          {"anomaly_count", cfg.anomaly_count},
          {"anomaly_amplitude", cfg.anomaly_amplitude},
          {"noise_ratio", cfg.noise_ratio},
          {"propagation_factor", cfg.propagation_factor},
          {"anomalous_run", cfg.anomalous_run},
          {"anomaly_interval", {cfg.anomaly_interval.first, cfg.anomaly_interval.second}},
          {"seed", cfg.seed}};
}

json clustering_to_json(const ClusteringResult& result,
                        const std::vector<std::string>& run_ids) {
  json models = json::array();
  for (const auto& m : result.models) {
    json entry;
    entry["cluster_id"] = m.cluster_id;
    entry["dim"] = m.precision.rows();
    entry["mean"] = std::vector<Scalar>(m.mean.data(), m.mean.data() + m.mean.size());
    std::vector<Scalar> dense;
    dense.reserve(static_cast<std::size_t>(m.precision.size()));
    for (Index i = 0; i < m.precision.rows(); ++i)
      for (Index j = 0; j < m.precision.cols(); ++j) dense.push_back(m.precision(i, j));
    entry["precision"] = dense;
    models.push_back(std::move(entry));
  }

  json assignments = json::array();
  for (const auto& a : result.assignments) {
    if (a.run < 0 || a.run >= static_cast<Index>(run_ids.size()))
      throw Error("clustering_to_json: assignment references an unknown run");
    assignments.push_back({{"run", run_ids[static_cast<std::size_t>(a.run)]},
                           {"t", a.end_time},
                           {"cluster", a.cluster_id}});
  }

  return {{"models", models},
          {"assignments", assignments},
          {"objective_trace", result.objective_trace},
          {"converged", result.converged}};
}

ClusteringResult clustering_from_json(const json& doc,
                                      const std::vector<std::string>& run_ids) {
  ClusteringResult result;
  for (const auto& entry : doc.at("models")) {
    ClusterModel m;
    m.cluster_id = entry.at("cluster_id").get<int>();
    const auto dim = entry.at("dim").get<Index>();
    const auto mean = entry.at("mean").get<std::vector<Scalar>>();
    const auto dense = entry.at("precision").get<std::vector<Scalar>>();
    if (static_cast<Index>(mean.size()) != dim ||
        static_cast<Index>(dense.size()) != dim * dim)
      throw DataError("clustering model has inconsistent dimensions");
    m.mean = Eigen::Map<const Vector>(mean.data(), dim);
    m.precision.resize(dim, dim);
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < dim; ++j)
        m.precision(i, j) = dense[static_cast<std::size_t>(i * dim + j)];
    result.models.push_back(std::move(m));
  }

  for (const auto& entry : doc.at("assignments")) {
    Assignment a;
    const auto run_id = entry.at("run").get<std::string>();
    const auto it = std::find(run_ids.begin(), run_ids.end(), run_id);
    if (it == run_ids.end())
      throw DataError("clustering assignment references unknown run '" + run_id + "'");
    a.run = static_cast<Index>(it - run_ids.begin());
    a.end_time = entry.at("t").get<Index>();
    a.cluster_id = entry.at("cluster").get<int>();
    result.assignments.push_back(a);
  }

  result.objective_trace = doc.at("objective_trace").get<std::vector<Scalar>>();
  result.converged = doc.at("converged").get<bool>();
  return result;
}

json profile_to_json(const Profile& profile) {
  return {{"run_ids", profile.run_ids},
          {"sensor_count", profile.sensor_count},
          {"params", ticc_params_to_json(profile.params)},
          {"clustering", clustering_to_json(profile.clustering, profile.run_ids)}};
}

Profile profile_from_json(const json& doc) {
  Profile profile;
  profile.run_ids = doc.at("run_ids").get<std::vector<std::string>>();
  profile.sensor_count = doc.at("sensor_count").get<Index>();
  profile.params = ticc_params_from_json(doc.at("params"));
  profile.clustering = clustering_from_json(doc.at("clustering"), profile.run_ids);
  return profile;
}

json report_to_json(const ProfileDiffReport& report) {
  return {{"run_id", report.run_id},
          {"score", report.score},
          {"threshold", report.threshold},
          {"verdict", report.anomalous ? "anomalous" : "normal"},
          {"per_timestamp", report.per_timestamp}};
}

json ranking_to_json(const std::vector<std::pair<Index, Scalar>>& ranking,
                     const std::vector<std::string>& sensor_names) {
  json doc = json::array();
  int rank = 1;
  for (const auto& [sensor, score] : ranking) {
    doc.push_back({{"sensor", sensor_names.at(static_cast<std::size_t>(sensor))},
                   {"score", score},
                   {"rank", rank}});
    ++rank;
  }
  return doc;
}

std::vector<std::string> ranking_sensors_from_json(const json& doc) {
  std::vector<std::string> out;
  for (const auto& entry : doc) out.push_back(entry.at("sensor").get<std::string>());
  return out;
}

json ground_truth_to_json(const GroundTruth& truth, const SynthConfig& cfg,
                          const std::vector<std::string>& sensor_names,
                          const std::vector<std::string>& run_ids) {
  json roots = json::array();
  for (const Index s : truth.root_sensors)
    roots.push_back(sensor_names.at(static_cast<std::size_t>(s)));
  json doc;
  doc["root_cause_sensors"] = roots;
  doc["planted_assignments"] = truth.assignments;
  doc["anomalous_run"] =
      truth.anomalous_run >= 0
          ? json(run_ids.at(static_cast<std::size_t>(truth.anomalous_run)))
          : json();
  doc["config"] = synth_config_to_json(cfg);
  return doc;
}

GroundTruthInfo ground_truth_info_from_json(const json& doc) {
  GroundTruthInfo info;
  info.root_sensors = doc.at("root_cause_sensors").get<std::vector<std::string>>();
  if (doc.contains("anomalous_run") && !doc.at("anomalous_run").is_null())
    info.anomalous_run_id = doc.at("anomalous_run").get<std::string>();
  return info;
}

}  // namespace causalrank

#include "causalrank/config.hpp"

#include <algorithm>
#include <fstream>

#include "causalrank/errors.hpp"
#include "causalrank/random.hpp"

namespace causalrank {

namespace {

using nlohmann::json;

// Pulls typed fields out of one JSON object, rejecting anything unknown.
class FieldReader {
 public:
  FieldReader(const json& doc, std::string scope) : doc_(doc), scope_(std::move(scope)) {
    if (!doc_.is_object())
      throw ConfigError("config field '" + scope_ + "' must be an object");
  }

  ~FieldReader() = default;

  template <typename T>
  void read(const char* key, T& out) {
    seen_.push_back(key);
    if (!doc_.contains(key)) return;
    try {
      out = doc_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config field '" + path(key) + "' has the wrong type");
    }
  }

  void read_path(const char* key, std::filesystem::path& out) {
    std::string s = out.string();
    read(key, s);
    out = s;
  }

  const json& raw(const char* key) {
    seen_.push_back(key);
    return doc_.at(key);
  }

  bool has(const char* key) const { return doc_.contains(key); }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
        throw ConfigError("unknown config field '" + path(key.c_str()) + "'");
    }
  }

  std::string path(const char* key) const {
    return scope_.empty() ? key : scope_ + "." + key;
  }

 private:
  const json& doc_;
  std::string scope_;
  std::vector<std::string> seen_;
};

TiccParams ticc_from_json(const json& doc, TiccParams out) {
  FieldReader r(doc, "ticc");
  r.read("num_clusters", out.num_clusters);
  r.read("sparsity", out.sparsity);
  r.read("switch_penalty", out.switch_penalty);
  r.read("cross_run_penalty", out.cross_run_penalty);
  r.read("window_size", out.window_size);
  r.read("run_window", out.run_window);
  r.read("max_em_iters", out.max_em_iters);
  r.read("em_tol", out.em_tol);
  r.read("restarts", out.restarts);
  r.finish();
  return out;
}

ScoringParams scoring_from_json(const json& doc, ScoringParams out) {
  FieldReader r(doc, "scoring");
  r.read("propagation_factor", out.propagation_factor);
  r.read("l1_weight", out.l1_weight);
  r.read("vanish_ratio", out.vanish_ratio);
  r.read("edge_floor", out.edge_floor);
  r.read("max_iters", out.solver.max_iters);
  r.read("tol", out.solver.tol);
  r.finish();
  return out;
}

ThresholdConfig threshold_from_json(const json& doc, ThresholdConfig out) {
  FieldReader r(doc, "threshold");
  r.read("floor", out.floor);
  r.read("mad_multiplier", out.mad_multiplier);
  r.read("min_history", out.min_history);
  r.finish();
  return out;
}

SynthConfig synth_from_json(const json& doc, SynthConfig out) {
  FieldReader r(doc, "synth");
  r.read("sensors", out.sensors);
  r.read("time_steps", out.time_steps);
  r.read("runs", out.runs);
  r.read("clusters", out.clusters);
  r.read("window_size", out.window_size);
  r.read("max_lag", out.max_lag);
  r.read("edge_prob", out.edge_prob);
  r.read("segments", out.segments);
  r.read("anomaly_count", out.anomaly_count);
  r.read("anomaly_amplitude", out.anomaly_amplitude);
  r.read("noise_ratio", out.noise_ratio);
  r.read("propagation_factor", out.propagation_factor);
  r.read("anomalous_run", out.anomalous_run);
  if (r.has("anomaly_interval")) {
    const auto& v = r.raw("anomaly_interval");
    if (!v.is_array() || v.size() != 2)
      throw ConfigError("config field 'synth.anomaly_interval' must be [start, end]");
    out.anomaly_interval = {v.at(0).get<Index>(), v.at(1).get<Index>()};
  }
  r.finish();
  return out;
}

EvalParams eval_from_json(const json& doc, EvalParams out) {
  FieldReader r(doc, "eval");
  r.read("top_k", out.top_k);
  r.read("ndcg_p", out.ndcg_p);
  r.finish();
  return out;
}

SweepConfig sweep_from_json(const json& doc, SweepConfig out) {
  FieldReader r(doc, "sweep");
  r.read("experiment", out.experiment);
  r.read("grid", out.grid);
  r.read("seeds", out.seeds);
  r.read("methods", out.methods);
  r.finish();
  return out;
}

}  // namespace

void PipelineConfig::finalize() {
  synth.seed = derive_seed(seed, "synth");
  ticc.seed = derive_seed(seed, "ticc");
  ticc.threads = threads;
  scoring.threads = threads;
}

PipelineConfig default_config() {
  PipelineConfig config;
  config.sweep.grid = {2, 3, 4};
  config.sweep.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  config.sweep.methods = {"full", "single_state"};
  config.finalize();
  return config;
}

PipelineConfig config_from_json(const nlohmann::json& doc) {
  PipelineConfig config = default_config();
  FieldReader r(doc, "");
  r.read("seed", config.seed);
  r.read("threads", config.threads);
  r.read_path("out", config.out);
  if (r.has("data")) {
    FieldReader d(r.raw("data"), "data");
    d.read_path("csv", config.data_csv);
    d.read_path("ground_truth", config.ground_truth);
    d.finish();
  }
  if (r.has("ticc")) config.ticc = ticc_from_json(r.raw("ticc"), config.ticc);
  if (r.has("scoring"))
    config.scoring = scoring_from_json(r.raw("scoring"), config.scoring);
  if (r.has("threshold"))
    config.threshold = threshold_from_json(r.raw("threshold"), config.threshold);
  if (r.has("synth")) config.synth = synth_from_json(r.raw("synth"), config.synth);
  if (r.has("eval")) config.eval = eval_from_json(r.raw("eval"), config.eval);
  if (r.has("sweep")) config.sweep = sweep_from_json(r.raw("sweep"), config.sweep);
  r.finish();
  config.finalize();
  return config;
}

nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json doc;
  doc["seed"] = c.seed;
  doc["threads"] = c.threads;
  doc["out"] = c.out.string();
  doc["data"] = {{"csv", c.data_csv.string()},
                 {"ground_truth", c.ground_truth.string()}};
  doc["ticc"] = {{"num_clusters", c.ticc.num_clusters},
                 {"sparsity", c.ticc.sparsity},
                 {"switch_penalty", c.ticc.switch_penalty},
                 {"cross_run_penalty", c.ticc.cross_run_penalty},
                 {"window_size", c.ticc.window_size},
                 {"run_window", c.ticc.run_window},
                 {"max_em_iters", c.ticc.max_em_iters},
                 {"em_tol", c.ticc.em_tol},
                 {"restarts", c.ticc.restarts}};
  doc["scoring"] = {{"propagation_factor", c.scoring.propagation_factor},
                    {"l1_weight", c.scoring.l1_weight},
                    {"vanish_ratio", c.scoring.vanish_ratio},
                    {"edge_floor", c.scoring.edge_floor},
                    {"max_iters", c.scoring.solver.max_iters},
                    {"tol", c.scoring.solver.tol}};
  doc["threshold"] = {{"floor", c.threshold.floor},
                      {"mad_multiplier", c.threshold.mad_multiplier},
                      {"min_history", c.threshold.min_history}};
  doc["synth"] = {{"sensors", c.synth.sensors},
                  {"time_steps", c.synth.time_steps},
                  {"runs", c.synth.runs},
                  {"clusters", c.synth.clusters},
                  {"window_size", c.synth.window_size},
                  {"max_lag", c.synth.max_lag},
                  {"edge_prob", c.synth.edge_prob},
                  {"segments", c.synth.segments},
                  {"anomaly_count", c.synth.anomaly_count},
                  {"anomaly_amplitude", c.synth.anomaly_amplitude},
                  {"noise_ratio", c.synth.noise_ratio},
                  {"propagation_factor", c.synth.propagation_factor},
                  {"anomalous_run", c.synth.anomalous_run},
                  {"anomaly_interval",
                   {c.synth.anomaly_interval.first, c.synth.anomaly_interval.second}}};
  doc["eval"] = {{"top_k", c.eval.top_k}, {"ndcg_p", c.eval.ndcg_p}};
  doc["sweep"] = {{"experiment", c.sweep.experiment},
                  {"grid", c.sweep.grid},
                  {"seeds", c.sweep.seeds},
                  {"methods", c.sweep.methods}};
  return doc;
}

PipelineConfig load_config(const std::optional<std::filesystem::path>& file,
                           const std::vector<std::string>& overrides) {
  nlohmann::json doc = nlohmann::json::object();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot open config file: " + file->string());
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file " + file->string() + " is not valid JSON: " + e.what());
    }
  }

  for (const auto& entry : overrides) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + entry + "' is not of the form key=value");
    const std::string key = entry.substr(0, eq);
    const std::string value = entry.substr(eq + 1);
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(value);
    } catch (const nlohmann::json::exception&) {
      parsed = value;  // plain string
    }

    nlohmann::json* node = &doc;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot - start);
      if (part.empty())
        throw ConfigError("override '" + entry + "' has an empty path segment");
      if (dot == std::string::npos) {
        (*node)[part] = parsed;
        break;
      }
      node = &(*node)[part];
      start = dot + 1;
    }
  }

  return config_from_json(doc);
}

}  // namespace causalrank

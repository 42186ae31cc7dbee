#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "causalrank/dataset.hpp"
#include "causalrank/ticc.hpp"
#include "causalrank/types.hpp"

namespace causalrank {

struct SynthConfig {
  Index sensors = 20;       // N
  Index time_steps = 400;   // T
  Index runs = 6;           // R
  int clusters = 3;         // planted state count
  Index window_size = 2;    // generating window t_w
  Index max_lag = 1;        // max cross-time lag of planted edges, <= window_size-1
  Scalar edge_prob = 0.03;  // Erdos-Renyi edge probability
  // Cluster id (1-based) per contiguous equal-length segment of 1..T;
  // empty means one segment per cluster in order.
  std::vector<int> segments;
  int anomaly_count = 3;            // m root-cause sensors; 0 disables injection
  Scalar anomaly_amplitude = 4.0;   // gamma
  Scalar noise_ratio = 0.0;
  Scalar propagation_factor = 0.6;  // c used to build the injected b
  Index anomalous_run = -1;         // 0-based; -1 means the last run
  // 1-based inclusive injection interval; {1, -1} means the whole run.
  std::pair<Index, Index> anomaly_interval = {1, -1};
  std::uint64_t seed = 0;

  std::vector<int> schedule() const;  // planted cluster id (1-based) per timestamp
  Index resolved_anomalous_run() const;
  std::pair<Index, Index> resolved_interval() const;
  void validate() const;
};

struct GroundTruth {
  std::vector<ClusterModel> models;
  std::vector<int> assignments;       // planted cluster id per timestamp, 1-based
  std::vector<Index> root_sensors;    // sorted, 0-based
  std::vector<Vector> planted_b;      // per cluster, stacked propagated scores
  Index anomalous_run = -1;           // -1 when nothing was injected
};

struct SynthResult {
  RunDataset data;
  GroundTruth truth;
};

// K planted MRFs from Erdos-Renyi graphs on the stacked index set, edges
// restricted to |time lag| <= max_lag, weights uniform in [0.3, 1.0] with
// random sign, block-Toeplitz projected and made positive definite with
// margin 0.1.
std::vector<ClusterModel> generate_mrfs(const SynthConfig& cfg);

// Samples each run as one consistent time series: the first window jointly
// from the active cluster's Gaussian, every later point from the
// conditional of the newest block given the previous window_size-1 blocks.
// Observation noise is added at noise_ratio times the per-sensor signal
// stddev.
SynthResult generate_series(const std::vector<ClusterModel>& models,
                            const std::vector<int>& schedule, const SynthConfig& cfg);

// Picks anomaly_count root sensors, propagates the indicator through each
// cluster's operator (b = E s), and scales each sensor over the anomalous
// interval by 1 + amplitude * max-over-offsets b.
SynthResult inject_anomalies(SynthResult base, const SynthConfig& cfg);

// generate_mrfs + generate_series + (when anomaly_count > 0) inject_anomalies.
SynthResult generate(const SynthConfig& cfg);

}  // namespace causalrank

#pragma once

#include <map>
#include <utility>
#include <vector>

#include "causalrank/types.hpp"

namespace causalrank {

// Degree-normalized absolute adjacency: W = |A| with zero diagonal,
// a_tilde = D^{-1/2} W D^{-1/2} where D_ii = sum_j W_ij. Zero-degree
// rows/columns stay zero.
struct NormalizedAdjacency {
  Matrix a_tilde;
  Vector degree;
};

NormalizedAdjacency normalize_adjacency(const Matrix& a);

// Linear fault-propagation operator e = (1-c)(I - c*a_tilde)^{-1}, the
// closed-form minimizer of the smoothness + fitting objective.
struct PropagationOperator {
  Matrix e;
  Scalar factor = 0.9;  // c
};

// Requires 0 <= factor < 1; factor 0 yields the identity (no propagation).
PropagationOperator propagation_operator(const NormalizedAdjacency& adjacency,
                                         Scalar factor);

// b = E s.
Vector fault_propagate(const PropagationOperator& op, const Vector& s);

// Ground-truth MRF vs the broken edges observed in an anomalous run.
// mask marks ground-truth edges (|gt| > edge_floor, off-diagonal); broken
// carries the degree-normalized ground-truth weight wherever an edge's
// observed strength fell below vanish_ratio * its ground-truth strength.
struct BrokenNetworkPair {
  Matrix ground_truth;
  Matrix broken;
  Matrix mask;  // 0/1
};

BrokenNetworkPair build_broken_network(const Matrix& ground_truth,
                                       const Matrix& observed, Scalar vanish_ratio,
                                       Scalar edge_floor);

struct ScoreSolverOptions {
  int max_iters = 500;
  Scalar tol = 1e-6;          // relative objective change
  Scalar init_value = 0.5;
  Scalar denom_floor = 1e-12;
  bool record_trace = true;
};

struct WindowScores {
  Vector s;
  std::vector<Scalar> objective_trace;  // objective after each update
  bool converged = true;
};

// Minimizes ||(E s s' E') o M - B||_F^2 + l1_weight * ||s||_1 over s >= 0
// with the quarter-power multiplicative update; each update leaves the
// objective non-increasing.
WindowScores solve_window_scores(const PropagationOperator& op,
                                 const BrokenNetworkPair& pair, Scalar l1_weight,
                                 const ScoreSolverOptions& options = {});

// Per-point scores from overlapping window scores: entry (n, t) averages
// every window-score entry that references sensor n at timestamp t.
// window_scores maps the window end timestamp (1-based) to the stacked
// score vector of length sensor_count * window_size.
Matrix aggregate_point_scores(const std::map<Index, Vector>& window_scores,
                              Index sensor_count, Index window_size,
                              Index total_time);

// Sensors by descending max-over-time point score; ties broken by
// ascending sensor index.
std::vector<std::pair<Index, Scalar>> rank_sensors(const Matrix& point_scores);

// Causal (s) and propagated (b) scores for one anomalous run, both as raw
// per-window vectors and aggregated per-point matrices.
struct ScoreSeries {
  std::map<Index, Vector> window_scores;      // end_time -> s
  std::map<Index, Vector> window_propagated;  // end_time -> b
  Matrix point_scores;                        // N x T
  Matrix propagated;                          // N x T
};

struct ScoringParams {
  Scalar propagation_factor = 0.9;  // c
  Scalar l1_weight = 0.3;           // xi
  Scalar vanish_ratio = 0.5;        // theta
  Scalar edge_floor = 1e-4;         // epsilon
  ScoreSolverOptions solver;
  int threads = 0;
};

}  // namespace causalrank

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "causalrank/dataset.hpp"
#include "causalrank/types.hpp"

namespace causalrank {

// One cluster's Gaussian Markov random field over a stacked window:
// symmetric positive-definite block-Toeplitz precision matrix plus mean.
struct ClusterModel {
  Matrix precision;  // (N*t_w) x (N*t_w)
  Vector mean;
  int cluster_id = 0;  // 1-based
};

struct TiccParams {
  int num_clusters = 3;           // K
  Scalar sparsity = 15.0;         // l1 weight on off-diagonal precision entries
  Scalar switch_penalty = 50.0;   // cost of a within-run cluster switch
  Scalar cross_run_penalty = 50.0;  // cost of a same-time adjacent-run disagreement
  Index window_size = 2;          // t_w
  Index run_window = 2;           // r_w
  int max_em_iters = 100;
  Scalar em_tol = 1e-6;
  int restarts = 0;  // seeded random restarts in addition to the contiguous init
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
};

// The joint cluster state space of the assignment DP has
// num_clusters^run_window states per timestamp; configurations beyond this
// cap are rejected.
inline constexpr std::uint64_t kMaxJointStates = 4096;

struct Assignment {
  Index end_time = 0;  // 1-based window end timestamp
  Index run = 0;       // 0-based run position
  int cluster_id = 0;  // 1-based
};

struct ClusteringResult {
  std::vector<ClusterModel> models;
  std::vector<Assignment> assignments;
  std::vector<Scalar> objective_trace;  // one entry per accepted EM iteration
  bool converged = true;

  // cluster_id at (end_time, run); throws if absent.
  int cluster_of(Index end_time, Index run) const;
};

// Negative log-likelihood table for the assignment step:
// per_run[r](i, k) = -loglik of run r's window ending at
// first_end_time + i under cluster k (0-based column).
struct NegLogLikTable {
  std::vector<Matrix> per_run;
  Index first_end_time = 1;
};

// Gaussian log-density of x under the model's precision matrix:
// -0.5 (x-mu)' A (x-mu) + 0.5 log det A - (n/2) log 2pi.
// Throws DefinitenessError if the precision is not positive definite.
Scalar log_likelihood(const Vector& x, const ClusterModel& model);

struct AssignResult {
  Scalar cost = 0.0;  // sum(-loglik) + switch and disagreement penalties
  std::vector<Assignment> assignments;
};

// Exact minimum-cost joint assignment over all runs and timestamps:
// DP over the joint per-timestamp state space (one cluster per run), with
// switch_penalty charged per within-run consecutive-time switch and
// cross_run_penalty per same-time adjacent-run disagreement.
AssignResult assign_clusters(const NegLogLikTable& table, const TiccParams& params);

struct GlassoOptions {
  int max_iters = 200;
  Scalar tol = 1e-5;
  Scalar admm_rho = 1.0;
  Scalar diag_shrinkage = 0.2;  // covariance blend toward its diagonal on small clusters
  Scalar pd_floor = 1e-6;       // minimum eigenvalue enforced on the output
  // Off-diagonal entries below post_threshold times the per-sample l1
  // penalty are snapped to zero after the block-Toeplitz projection.
  Scalar post_threshold = 0.5;
};

struct MrfFit {
  ClusterModel model;
  bool converged = true;
  int iterations = 0;
};

// l1-penalized Gaussian MLE (ADMM graphical lasso) followed by projection
// onto the symmetric block-Toeplitz subspace and a positive-definite floor.
// `samples` holds one stacked window per column; `block_dim` is the sensor
// count N. Non-convergence returns the last iterate with converged=false.
MrfFit fit_toeplitz_mrf(const Matrix& samples, Index block_dim, Scalar sparsity,
                        const GlassoOptions& options = {});

using EmObserver = std::function<void(
    int iteration, const std::vector<ClusterModel>& models,
    const std::vector<Assignment>& assignments)>;

// EM over assign_clusters and fit_toeplitz_mrf. `windows` must come from
// exactly params.run_window aligned runs (run indices 0..run_window-1).
// disable_ltc / disable_gtc zero the corresponding penalty, as used when
// refitting a single anomalous run. The observer, when set, sees every
// candidate iteration's models and assignments.
ClusteringResult fit(const std::vector<StackedWindow>& windows, Index sensor_count,
                     const TiccParams& params, bool disable_ltc = false,
                     bool disable_gtc = false, const EmObserver& observer = nullptr);

}  // namespace causalrank

#include "causalrank/ticc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "causalrank/errors.hpp"
#include "causalrank/linalg.hpp"
#include "causalrank/parallel.hpp"
#include "causalrank/random.hpp"

namespace causalrank {

namespace {

constexpr Scalar kLog2Pi = 1.8378770664093454836;  // log(2*pi)
constexpr Scalar kCovarianceRidge = 1e-9;

// Precision Cholesky plus log-determinant, reused across a whole table build.
struct GaussianEvaluator {
  const ClusterModel* model;
  Scalar log_det;

  explicit GaussianEvaluator(const ClusterModel& m) : model(&m) {
    Eigen::LLT<Matrix> llt(m.precision);
    if (llt.info() != Eigen::Success)
      throw DefinitenessError("precision matrix of cluster " +
                              std::to_string(m.cluster_id) +
                              " is not positive definite");
    log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  }

  Scalar log_likelihood(const Vector& x) const {
    const Vector d = x - model->mean;
    const Scalar quad = d.dot(model->precision * d);
    const Scalar n = static_cast<Scalar>(x.size());
    return -0.5 * quad + 0.5 * log_det - 0.5 * n * kLog2Pi;
  }
};

Scalar offdiag_l1(const Matrix& a) {
  return a.cwiseAbs().sum() - a.diagonal().cwiseAbs().sum();
}

}  // namespace

int ClusteringResult::cluster_of(Index end_time, Index run) const {
  for (const auto& a : assignments)
    if (a.end_time == end_time && a.run == run) return a.cluster_id;
  throw Error("no assignment for end_time " + std::to_string(end_time) +
              ", run " + std::to_string(run));
}

Scalar log_likelihood(const Vector& x, const ClusterModel& model) {
  if (x.size() != model.precision.rows() || x.size() != model.mean.size())
    throw Error("log_likelihood: dimension mismatch");
  return GaussianEvaluator(model).log_likelihood(x);
}

AssignResult assign_clusters(const NegLogLikTable& table, const TiccParams& params) {
  const auto run_count = static_cast<Index>(table.per_run.size());
  if (run_count == 0) throw Error("assign_clusters: empty table");
  const Index t_count = table.per_run.front().rows();
  const Index k_count = table.per_run.front().cols();
  for (const auto& m : table.per_run)
    if (m.rows() != t_count || m.cols() != k_count)
      throw Error("assign_clusters: ragged table");
  if (t_count == 0 || k_count == 0) throw Error("assign_clusters: empty table");

  std::uint64_t state_count = 1;
  for (Index r = 0; r < run_count; ++r) {
    state_count *= static_cast<std::uint64_t>(k_count);
    if (state_count > kMaxJointStates)
      throw CapacityError(
          "joint state space num_clusters^run_window exceeds " +
          std::to_string(kMaxJointStates) +
          "; reduce num_clusters or run_window");
  }
  const auto states = static_cast<Index>(state_count);
  const Scalar beta = params.switch_penalty;
  const Scalar alpha = params.cross_run_penalty;

  // digit(idx, r) = cluster of run r in joint state idx.
  std::vector<int> digits(static_cast<std::size_t>(states * run_count));
  std::vector<Scalar> disagree_cost(static_cast<std::size_t>(states), 0.0);
  for (Index idx = 0; idx < states; ++idx) {
    Index v = idx;
    for (Index r = 0; r < run_count; ++r) {
      digits[static_cast<std::size_t>(idx * run_count + r)] = static_cast<int>(v % k_count);
      v /= k_count;
    }
    Scalar c = 0.0;
    for (Index r = 1; r < run_count; ++r)
      if (digits[static_cast<std::size_t>(idx * run_count + r)] !=
          digits[static_cast<std::size_t>(idx * run_count + r - 1)])
        c += alpha;
    disagree_cost[static_cast<std::size_t>(idx)] = c;
  }
  const auto digit = [&](Index idx, Index r) {
    return digits[static_cast<std::size_t>(idx * run_count + r)];
  };

  const auto node_cost = [&](Index t, Index idx) {
    Scalar c = disagree_cost[static_cast<std::size_t>(idx)];
    for (Index r = 0; r < run_count; ++r)
      c += table.per_run[static_cast<std::size_t>(r)](t, digit(idx, r));
    return c;
  };

  // Forward DP. The transition min over predecessors decomposes per run
  // (switch costs are additive across runs), so each step relaxes one run
  // coordinate at a time instead of scanning all state pairs.
  std::vector<Scalar> dp(static_cast<std::size_t>(t_count * states));
  for (Index idx = 0; idx < states; ++idx)
    dp[static_cast<std::size_t>(idx)] = node_cost(0, idx);

  std::vector<Scalar> relaxed(static_cast<std::size_t>(states));
  for (Index t = 1; t < t_count; ++t) {
    const Scalar* prev = dp.data() + (t - 1) * states;
    std::copy(prev, prev + states, relaxed.begin());
    Index stride = 1;
    for (Index r = 0; r < run_count; ++r) {
      const Index outer = states / (stride * k_count);
      for (Index high = 0; high < outer; ++high) {
        for (Index low = 0; low < stride; ++low) {
          const Index base = high * stride * k_count + low;
          Scalar best = std::numeric_limits<Scalar>::infinity();
          for (Index k = 0; k < k_count; ++k)
            best = std::min(best, relaxed[static_cast<std::size_t>(base + k * stride)]);
          const Scalar with_switch = best + beta;
          for (Index k = 0; k < k_count; ++k) {
            auto& v = relaxed[static_cast<std::size_t>(base + k * stride)];
            v = std::min(v, with_switch);
          }
        }
      }
      stride *= k_count;
    }
    Scalar* curr = dp.data() + t * states;
    for (Index idx = 0; idx < states; ++idx)
      curr[idx] = relaxed[static_cast<std::size_t>(idx)] + node_cost(t, idx);
  }

  // Final state: lowest cost, lowest index on ties.
  Index best_idx = 0;
  {
    const Scalar* last = dp.data() + (t_count - 1) * states;
    for (Index idx = 1; idx < states; ++idx)
      if (last[idx] < last[best_idx]) best_idx = idx;
  }

  const auto switches = [&](Index a, Index b) {
    int s = 0;
    for (Index r = 0; r < run_count; ++r)
      if (digit(a, r) != digit(b, r)) ++s;
    return s;
  };

  std::vector<Index> path(static_cast<std::size_t>(t_count));
  path.back() = best_idx;
  for (Index t = t_count - 1; t > 0; --t) {
    const Scalar* prev = dp.data() + (t - 1) * states;
    const Index curr = path[static_cast<std::size_t>(t)];
    Index arg = 0;
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (Index idx = 0; idx < states; ++idx) {
      const Scalar c = prev[idx] + beta * static_cast<Scalar>(switches(idx, curr));
      if (c < best) {
        best = c;
        arg = idx;
      }
    }
    path[static_cast<std::size_t>(t - 1)] = arg;
  }

  AssignResult out;
  out.assignments.reserve(static_cast<std::size_t>(run_count * t_count));
  for (Index r = 0; r < run_count; ++r)
    for (Index t = 0; t < t_count; ++t)
      out.assignments.push_back(
          {table.first_end_time + t, r, digit(path[static_cast<std::size_t>(t)], r) + 1});

  // Report the cost of the returned assignment itself.
  Scalar cost = 0.0;
  for (Index t = 0; t < t_count; ++t) {
    cost += node_cost(t, path[static_cast<std::size_t>(t)]);
    if (t > 0)
      cost += beta * static_cast<Scalar>(
                         switches(path[static_cast<std::size_t>(t - 1)],
                                  path[static_cast<std::size_t>(t)]));
  }
  out.cost = cost;
  return out;
}

MrfFit fit_toeplitz_mrf(const Matrix& samples, Index block_dim, Scalar sparsity,
                        const GlassoOptions& options) {
  const Index n = samples.rows();
  const Index m = samples.cols();
  if (m == 0) throw Error("fit_toeplitz_mrf: no samples");
  if (block_dim <= 0 || n % block_dim != 0)
    throw Error("fit_toeplitz_mrf: sample dimension is not a multiple of the block dimension");

  MrfFit fit;
  fit.model.mean = samples.rowwise().mean();
  const Matrix centered = samples.colwise() - fit.model.mean;
  Matrix cov = centered * centered.transpose() / static_cast<Scalar>(m);
  if (m < n + 1) {
    // Too few samples for a stable MLE: pull the off-diagonal toward zero.
    const Vector d = cov.diagonal();
    cov = (1.0 - options.diag_shrinkage) * cov;
    cov.diagonal() = d;
  }
  cov.diagonal().array() += kCovarianceRidge;

  Matrix estimate;
  if (sparsity <= 0.0) {
    estimate = Eigen::LLT<Matrix>(cov).solve(Matrix::Identity(n, n));
    fit.converged = true;
  } else {
    // ADMM for min tr(S A) - log det A + penalty * |A|_1 over off-diagonals,
    // where the penalty rescales the window-summed objective to per-sample form.
    const Scalar penalty = 2.0 * sparsity / static_cast<Scalar>(m);
    const Scalar rho = options.admm_rho;
    Matrix z = Matrix::Zero(n, n);
    z.diagonal() = cov.diagonal().cwiseInverse();
    Matrix u = Matrix::Zero(n, n);
    Matrix theta = z;
    fit.converged = false;
    for (int iter = 0; iter < options.max_iters; ++iter) {
      ++fit.iterations;
      Matrix w = rho * (z - u) - cov;
      w = 0.5 * (w + w.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Matrix> es(w);
      const Vector lam = es.eigenvalues();
      Vector d(n);
      for (Index i = 0; i < n; ++i)
        d(i) = (lam(i) + std::sqrt(lam(i) * lam(i) + 4.0 * rho)) / (2.0 * rho);
      theta = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();

      const Matrix z_old = z;
      z = theta + u;
      const Scalar thr = penalty / rho;
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
          if (i != j) z(i, j) = soft_threshold(z(i, j), thr);

      u += theta - z;

      const Scalar scale = std::max(1.0, theta.norm());
      const Scalar primal = (theta - z).norm();
      const Scalar dual = rho * (z - z_old).norm();
      if (primal <= options.tol * scale && dual <= options.tol * scale) {
        fit.converged = true;
        break;
      }
    }
    estimate = z;
  }

  estimate = block_toeplitz_project(estimate, block_dim);
  if (sparsity > 0.0) {
    // Averaging sub-blocks smears the ADMM's exact zeros into small
    // remnants; snap those back to zero. Uniform over the (equal) entries
    // of each block diagonal, so the Toeplitz structure survives.
    const Scalar floor = options.post_threshold * 2.0 * sparsity / static_cast<Scalar>(m);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j && std::abs(estimate(i, j)) < floor) estimate(i, j) = 0.0;
  }
  fit.model.precision = ensure_min_eigenvalue(std::move(estimate), options.pd_floor);
  return fit;
}

namespace {

struct WindowGrid {
  // window index by (run, time slot), run-major
  std::vector<Index> index;
  Index run_count = 0;
  Index t_count = 0;
  Index first_end_time = 1;

  Index at(Index r, Index t) const { return index[static_cast<std::size_t>(r * t_count + t)]; }
};

WindowGrid build_grid(const std::vector<StackedWindow>& windows, Index run_window) {
  WindowGrid grid;
  grid.run_count = run_window;
  Index min_end = std::numeric_limits<Index>::max();
  Index max_end = std::numeric_limits<Index>::min();
  for (const auto& w : windows) {
    if (w.run < 0 || w.run >= run_window)
      throw ConfigError("fit: windows reference run " + std::to_string(w.run) +
                        " outside run_window " + std::to_string(run_window));
    min_end = std::min(min_end, w.end_time);
    max_end = std::max(max_end, w.end_time);
  }
  grid.first_end_time = min_end;
  grid.t_count = max_end - min_end + 1;
  grid.index.assign(static_cast<std::size_t>(run_window * grid.t_count), -1);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    auto& slot = grid.index[static_cast<std::size_t>(w.run * grid.t_count + (w.end_time - min_end))];
    if (slot != -1) throw ConfigError("fit: duplicate window for (end_time, run)");
    slot = static_cast<Index>(i);
  }
  for (const auto slot : grid.index)
    if (slot == -1) throw ConfigError("fit: missing window; runs are not aligned");
  return grid;
}

struct EmState {
  std::vector<ClusterModel> models;
  std::vector<int> assignment;  // per window (global index), 0-based cluster
  Scalar objective = std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> trace;
  bool converged = false;
  bool mstep_converged = true;
};

}  // namespace

ClusteringResult fit(const std::vector<StackedWindow>& windows, Index sensor_count,
                     const TiccParams& params, bool disable_ltc, bool disable_gtc,
                     const EmObserver& observer) {
  if (windows.empty()) throw ConfigError("fit: no windows");
  const int k_count = params.num_clusters;
  if (k_count < 1) throw ConfigError("fit: num_clusters must be >= 1");
  const Index dim = sensor_count * params.window_size;
  for (const auto& w : windows)
    if (w.values.size() != dim)
      throw ConfigError("fit: window dimension does not match sensor_count * window_size");

  const WindowGrid grid = build_grid(windows, params.run_window);
  const auto total = static_cast<Index>(windows.size());
  if (k_count > grid.t_count)
    throw ConfigError("fit: num_clusters (" + std::to_string(k_count) +
                      ") exceeds the " + std::to_string(grid.t_count) +
                      " windows per run");

  TiccParams effective = params;
  if (disable_ltc) effective.switch_penalty = 0.0;
  if (disable_gtc) effective.cross_run_penalty = 0.0;

  const auto m_step = [&](const std::vector<int>& assignment,
                          std::vector<ClusterModel>& models, bool& all_converged) {
    models.assign(static_cast<std::size_t>(k_count), ClusterModel{});
    bool ok = true;
    parallel_for(k_count, params.threads, [&](Index k) {
      std::vector<Index> members;
      for (Index i = 0; i < total; ++i)
        if (assignment[static_cast<std::size_t>(i)] == static_cast<int>(k))
          members.push_back(i);
      Matrix samples(dim, static_cast<Index>(members.size()));
      for (std::size_t j = 0; j < members.size(); ++j)
        samples.col(static_cast<Index>(j)) =
            windows[static_cast<std::size_t>(members[j])].values;
      GlassoOptions opt;
      MrfFit f = fit_toeplitz_mrf(samples, sensor_count, effective.sparsity, opt);
      f.model.cluster_id = static_cast<int>(k) + 1;
      models[static_cast<std::size_t>(k)] = std::move(f.model);
      if (!f.converged) ok = false;
    });
    all_converged = ok;
  };

  // Every cluster must own at least one window before an M-step. Empty
  // clusters each steal the first window of the currently largest cluster.
  const auto fill_empty_clusters = [&](std::vector<int>& assignment) {
    std::vector<Index> counts(static_cast<std::size_t>(k_count), 0);
    for (int a : assignment) ++counts[static_cast<std::size_t>(a)];
    for (int k = 0; k < k_count; ++k) {
      if (counts[static_cast<std::size_t>(k)] > 0) continue;
      int donor = 0;
      for (int c = 1; c < k_count; ++c)
        if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(donor)])
          donor = c;
      for (Index i = 0; i < total; ++i)
        if (assignment[static_cast<std::size_t>(i)] == donor) {
          assignment[static_cast<std::size_t>(i)] = k;
          --counts[static_cast<std::size_t>(donor)];
          ++counts[static_cast<std::size_t>(k)];
          break;
        }
    }
  };

  const auto run_em = [&](std::vector<int> assignment) {
    EmState state;
    std::vector<int> current = std::move(assignment);
    fill_empty_clusters(current);

    for (int iter = 1; iter <= params.max_em_iters; ++iter) {
      std::vector<ClusterModel> models;
      bool mstep_ok = true;
      m_step(current, models, mstep_ok);

      // Evaluate -loglik for every (window, cluster).
      std::vector<GaussianEvaluator> evals;
      evals.reserve(static_cast<std::size_t>(k_count));
      for (const auto& m : models) evals.emplace_back(m);
      NegLogLikTable table;
      table.first_end_time = grid.first_end_time;
      table.per_run.assign(static_cast<std::size_t>(grid.run_count),
                           Matrix(grid.t_count, k_count));
      parallel_for(grid.run_count, params.threads, [&](Index r) {
        auto& block = table.per_run[static_cast<std::size_t>(r)];
        for (Index t = 0; t < grid.t_count; ++t) {
          const auto& w = windows[static_cast<std::size_t>(grid.at(r, t))];
          for (int k = 0; k < k_count; ++k)
            block(t, k) = -evals[static_cast<std::size_t>(k)].log_likelihood(w.values);
        }
      });

      AssignResult assigned = assign_clusters(table, effective);
      Scalar objective = assigned.cost;
      for (const auto& m : models) objective += effective.sparsity * offdiag_l1(m.precision);

      if (observer) observer(iter, models, assigned.assignments);

      std::vector<int> next(static_cast<std::size_t>(total), 0);
      for (const auto& a : assigned.assignments)
        next[static_cast<std::size_t>(
            grid.at(a.run, a.end_time - grid.first_end_time))] = a.cluster_id - 1;

      const bool have_previous = !state.trace.empty();
      if (have_previous && objective > state.objective + 1e-12 * std::max(1.0, std::abs(state.objective))) {
        // The projection step makes the M-step inexact; stop at the best
        // accepted state rather than record an objective increase.
        state.converged = true;
        break;
      }

      const bool stable = have_previous && next == state.assignment;
      const bool small_change =
          have_previous &&
          std::abs(state.objective - objective) <=
              params.em_tol * std::max(1.0, std::abs(state.objective));

      state.models = std::move(models);
      state.assignment = next;
      state.objective = objective;
      state.trace.push_back(objective);
      if (!mstep_ok) state.mstep_converged = false;

      if (stable || small_change) {
        state.converged = true;
        break;
      }

      // Re-seed empty clusters with the worst-explained windows before the
      // next M-step.
      std::vector<Index> counts(static_cast<std::size_t>(k_count), 0);
      for (int a : next) ++counts[static_cast<std::size_t>(a)];
      bool reseeded = false;
      for (int k = 0; k < k_count; ++k) {
        if (counts[static_cast<std::size_t>(k)] > 0) continue;
        const auto need = static_cast<Index>((total + k_count - 1) / k_count);
        std::vector<std::pair<Scalar, Index>> ranked;
        ranked.reserve(static_cast<std::size_t>(total));
        for (Index i = 0; i < total; ++i) {
          const int a = next[static_cast<std::size_t>(i)];
          ranked.emplace_back(
              evals[static_cast<std::size_t>(a)].log_likelihood(
                  windows[static_cast<std::size_t>(i)].values),
              i);
        }
        std::sort(ranked.begin(), ranked.end());
        for (Index j = 0; j < std::min(need, total); ++j)
          next[static_cast<std::size_t>(ranked[static_cast<std::size_t>(j)].second)] = k;
        reseeded = true;
      }
      if (reseeded) fill_empty_clusters(next);
      current = next;
    }
    return state;
  };

  // Deterministic contiguous init; optional seeded random restarts.
  std::vector<EmState> results;
  {
    std::vector<int> init(static_cast<std::size_t>(total), 0);
    for (Index r = 0; r < grid.run_count; ++r)
      for (Index t = 0; t < grid.t_count; ++t)
        init[static_cast<std::size_t>(grid.at(r, t))] = static_cast<int>(
            std::min<Index>(t * k_count / grid.t_count, k_count - 1));
    results.push_back(run_em(std::move(init)));
  }
  for (int restart = 1; restart <= params.restarts; ++restart) {
    Rng rng(derive_seed(params.seed, "ticc.restart." + std::to_string(restart)));
    std::vector<int> init(static_cast<std::size_t>(total), 0);
    for (auto& a : init) a = static_cast<int>(rng.uniform_int(0, k_count - 1));
    results.push_back(run_em(std::move(init)));
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].objective < results[best].objective) best = i;
  EmState& chosen = results[best];

  ClusteringResult out;
  out.models = std::move(chosen.models);
  out.objective_trace = std::move(chosen.trace);
  out.converged = chosen.converged && chosen.mstep_converged;
  out.assignments.reserve(static_cast<std::size_t>(total));
  for (Index r = 0; r < grid.run_count; ++r)
    for (Index t = 0; t < grid.t_count; ++t)
      out.assignments.push_back(
          {grid.first_end_time + t, r,
           chosen.assignment[static_cast<std::size_t>(grid.at(r, t))] + 1});
  return out;
}

}  // namespace causalrank

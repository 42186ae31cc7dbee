#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <numbers>

#include "causalrank/errors.hpp"
#include "causalrank/linalg.hpp"
#include "causalrank/random.hpp"
#include "causalrank/synth.hpp"
#include "causalrank/ticc.hpp"
#include "support/oracles.hpp"

using namespace causalrank;

namespace {

ClusterModel identity_model(Index n) {
  ClusterModel m;
  m.precision = Matrix::Identity(n, n);
  m.mean = Vector::Zero(n);
  m.cluster_id = 1;
  return m;
}

NegLogLikTable random_table(Index runs, Index times, Index clusters, Rng& rng) {
  NegLogLikTable table;
  for (Index r = 0; r < runs; ++r) {
    Matrix m(times, clusters);
    for (Index t = 0; t < times; ++t)
      for (Index k = 0; k < clusters; ++k) m(t, k) = rng.uniform(0.0, 10.0);
    table.per_run.push_back(std::move(m));
  }
  return table;
}

Scalar assignment_cost(const NegLogLikTable& table,
                       const std::vector<Assignment>& assignments, Scalar beta,
                       Scalar alpha) {
  std::map<std::pair<Index, Index>, int> cluster;  // (t, r) -> 0-based
  for (const auto& a : assignments) cluster[{a.end_time, a.run}] = a.cluster_id - 1;
  const auto runs = static_cast<Index>(table.per_run.size());
  const Index times = table.per_run.front().rows();
  Scalar cost = 0.0;
  for (Index r = 0; r < runs; ++r)
    for (Index t = 0; t < times; ++t) {
      const int k = cluster.at({table.first_end_time + t, r});
      cost += table.per_run[static_cast<std::size_t>(r)](t, k);
      if (t > 0 && k != cluster.at({table.first_end_time + t - 1, r})) cost += beta;
      if (r > 0 && k != cluster.at({table.first_end_time + t, r - 1})) cost += alpha;
    }
  return cost;
}

TiccParams penalties(Scalar beta, Scalar alpha) {
  TiccParams p;
  p.switch_penalty = beta;
  p.cross_run_penalty = alpha;
  return p;
}

}  // namespace

TEST_CASE("log_likelihood closed-form values") {
  const auto model = identity_model(2);
  Vector x = Vector::Zero(2);
  CHECK(log_likelihood(x, model) ==
        doctest::Approx(-std::log(2.0 * std::numbers::pi)).epsilon(1e-12));
  CHECK(log_likelihood(x, model) == doctest::Approx(-1.837877).epsilon(1e-6));

  x(0) = 1.0;  // unit quadratic term
  CHECK(log_likelihood(x, model) ==
        doctest::Approx(-0.5 - std::log(2.0 * std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("log_likelihood matches the direct-formula oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const Index n = 4;
    Matrix half(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) half(i, j) = rng.normal();
    ClusterModel model;
    model.precision = half * half.transpose() + 0.5 * Matrix::Identity(n, n);
    model.mean = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) model.mean(i) = rng.normal();
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = rng.normal();

    const Scalar direct =
        testing::direct_log_likelihood(x, model.mean, model.precision);
    CHECK(log_likelihood(x, model) == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("log_likelihood rejects indefinite precision") {
  ClusterModel model;
  model.precision = Matrix(2, 2);
  model.precision << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
  model.mean = Vector::Zero(2);
  CHECK_THROWS_AS(log_likelihood(Vector::Zero(2), model), DefinitenessError);
}

TEST_CASE("assign_clusters with one cluster sums the table") {
  Rng rng(1);
  const auto table = random_table(2, 5, 1, rng);
  const auto result = assign_clusters(table, penalties(3.0, 2.0));
  Scalar expected = 0.0;
  for (const auto& m : table.per_run) expected += m.sum();
  CHECK(result.cost == doctest::Approx(expected).epsilon(1e-12));
  for (const auto& a : result.assignments) CHECK(a.cluster_id == 1);
}

TEST_CASE("assign_clusters switch-penalty example") {
  NegLogLikTable table;
  Matrix m(2, 2);
  m << 1.0, 5.0, 5.0, 1.0;
  table.per_run = {m};

  SUBCASE("cheap switch is taken") {
    const auto result = assign_clusters(table, penalties(0.5, 0.0));
    CHECK(result.cost == doctest::Approx(2.5));
    CHECK(result.assignments[0].cluster_id == 1);
    CHECK(result.assignments[1].cluster_id == 2);
  }
  SUBCASE("expensive switch is avoided") {
    const auto result = assign_clusters(table, penalties(10.0, 0.0));
    CHECK(result.cost == doctest::Approx(6.0));
    CHECK(result.assignments[0].cluster_id == result.assignments[1].cluster_id);
  }
}

TEST_CASE("assign_clusters cross-run penalty aligns runs") {
  NegLogLikTable table;
  Matrix m(1, 2);
  m << 2.0, 2.0;
  table.per_run = {m, m};
  const auto result = assign_clusters(table, penalties(0.0, 1.0));
  REQUIRE(result.assignments.size() == 2);
  CHECK(result.assignments[0].cluster_id == result.assignments[1].cluster_id);
  CHECK(result.cost == doctest::Approx(4.0));
}

TEST_CASE("assign_clusters matches brute force on random instances") {
  Rng rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const Index clusters = 2 + static_cast<Index>(rng.uniform_int(0, 1));
    const Index runs = 1 + static_cast<Index>(rng.uniform_int(0, 1));
    const Index times = 2 + static_cast<Index>(rng.uniform_int(0, 3));
    const Scalar beta = rng.uniform(0.0, 4.0);
    const Scalar alpha = rng.uniform(0.0, 4.0);
    const auto table = random_table(runs, times, clusters, rng);

    const auto dp = assign_clusters(table, penalties(beta, alpha));
    const auto brute = testing::brute_force_assign(table, beta, alpha);
    CHECK(std::abs(dp.cost - brute.cost) < 1e-12);
    CHECK(assignment_cost(table, dp.assignments, beta, alpha) ==
          doctest::Approx(dp.cost).epsilon(1e-12));
  }
}

TEST_CASE("assign_clusters never beats its previous assignment (E-step monotonicity)") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto table = random_table(2, 6, 3, rng);
    const Scalar beta = 1.5, alpha = 0.7;
    const auto dp = assign_clusters(table, penalties(beta, alpha));

    std::vector<Assignment> arbitrary;
    for (Index r = 0; r < 2; ++r)
      for (Index t = 0; t < 6; ++t)
        arbitrary.push_back(
            {table.first_end_time + t, r, 1 + static_cast<int>(rng.uniform_int(0, 2))});
    CHECK(dp.cost <= assignment_cost(table, arbitrary, beta, alpha) + 1e-12);
  }
}

TEST_CASE("assign_clusters enforces the joint state-space cap") {
  NegLogLikTable table;
  Matrix m = Matrix::Zero(1, 9);
  table.per_run = {m, m, m, m, m};  // 9^5 = 59049 > 4096
  TiccParams p = penalties(1.0, 1.0);
  CHECK_THROWS_AS(assign_clusters(table, p), CapacityError);
}

TEST_CASE("fit_toeplitz_mrf recovers the inverse empirical covariance at zero sparsity") {
  Rng rng(33);
  Matrix truth(2, 2);
  truth << 2.0, 0.8, 0.8, 1.0;  // covariance
  const Matrix chol = Eigen::LLT<Matrix>(truth).matrixL();

  const Index samples = 4000;
  Matrix x(2, samples);
  for (Index i = 0; i < samples; ++i) {
    Vector z(2);
    z << rng.normal(), rng.normal();
    x.col(i) = chol * z;
  }

  const auto fit = fit_toeplitz_mrf(x, 2, 0.0);
  CHECK(fit.converged);

  // Oracle: direct inverse of the empirical covariance, computed with
  // plain loops and the hand-rolled determinant.
  const Vector mean = x.rowwise().mean();
  Matrix cov = Matrix::Zero(2, 2);
  for (Index i = 0; i < samples; ++i) {
    const Vector d = x.col(i) - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<Scalar>(samples);
  const Scalar det = testing::dense_determinant(cov);
  Matrix inverse(2, 2);
  inverse << cov(1, 1) / det, -cov(0, 1) / det, -cov(1, 0) / det, cov(0, 0) / det;

  CHECK((fit.model.precision - inverse).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("fit_toeplitz_mrf zeroes the off-diagonal under a huge penalty") {
  Rng rng(8);
  Matrix x(4, 60);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 60; ++j) x(i, j) = rng.normal();
  const auto fit = fit_toeplitz_mrf(x, 2, 1e6);
  const Matrix& a = fit.model.precision;
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j)
      if (i != j) CHECK(a(i, j) == 0.0);
  CHECK(min_eigenvalue(a) > 0.0);
}

TEST_CASE("fit_toeplitz_mrf output satisfies the model invariants") {
  Rng rng(12);
  for (const Scalar sparsity : {0.0, 0.5, 5.0}) {
    Matrix x(6, 40);  // 3 sensors, window 2
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 40; ++j) x(i, j) = rng.normal();
    const auto fit = fit_toeplitz_mrf(x, 3, sparsity);
    const Matrix& a = fit.model.precision;
    CHECK(is_symmetric(a, 1e-10));
    CHECK(is_block_toeplitz(a, 3, 1e-8));
    CHECK(min_eigenvalue(a) > 0.0);
  }
}

TEST_CASE("fit_toeplitz_mrf applies shrinkage on tiny clusters without failing") {
  Rng rng(14);
  Matrix x(4, 3);  // fewer than n+1 samples
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 3; ++j) x(i, j) = rng.normal();
  const auto fit = fit_toeplitz_mrf(x, 2, 0.1);
  CHECK(min_eigenvalue(fit.model.precision) > 0.0);
}

TEST_CASE("fit recovers two well-separated regimes") {
  SynthConfig cfg;
  cfg.sensors = 4;
  cfg.time_steps = 160;
  cfg.runs = 1;
  cfg.clusters = 2;
  cfg.window_size = 2;
  cfg.max_lag = 1;
  cfg.edge_prob = 0.4;
  cfg.anomaly_count = 0;
  cfg.seed = 5;
  const SynthResult synth = generate(cfg);

  TiccParams params;
  params.num_clusters = 2;
  params.sparsity = 0.5;
  params.switch_penalty = 20.0;
  params.cross_run_penalty = 0.0;
  params.window_size = 2;
  params.run_window = 1;

  const auto windows = stack_windows(synth.data, 2);
  const auto result = fit(windows, cfg.sensors, params);

  // Agreement with the planted segmentation up to label permutation.
  int agree_direct = 0, agree_swapped = 0, total = 0;
  for (const auto& a : result.assignments) {
    const int planted =
        synth.truth.assignments[static_cast<std::size_t>(a.end_time - 1)];
    agree_direct += (a.cluster_id == planted);
    agree_swapped += (a.cluster_id == 3 - planted);
    ++total;
  }
  const double agreement =
      static_cast<double>(std::max(agree_direct, agree_swapped)) / total;
  CHECK(agreement >= 0.95);
}

TEST_CASE("fit with one cluster equals a single MRF fit over all windows") {
  SynthConfig cfg;
  cfg.sensors = 3;
  cfg.time_steps = 50;
  cfg.runs = 2;
  cfg.clusters = 1;
  cfg.window_size = 2;
  cfg.anomaly_count = 0;
  cfg.seed = 9;
  const SynthResult synth = generate(cfg);

  TiccParams params;
  params.num_clusters = 1;
  params.sparsity = 1.0;
  params.window_size = 2;
  params.run_window = 2;

  const auto windows = stack_windows(synth.data, 2);
  const auto result = fit(windows, cfg.sensors, params);
  REQUIRE(result.models.size() == 1);

  Matrix samples(6, static_cast<Index>(windows.size()));
  for (std::size_t i = 0; i < windows.size(); ++i)
    samples.col(static_cast<Index>(i)) = windows[i].values;
  const auto direct = fit_toeplitz_mrf(samples, 3, params.sparsity);
  CHECK((result.models[0].precision - direct.model.precision).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((result.models[0].mean - direct.model.mean).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fit is deterministic for a fixed seed") {
  SynthConfig cfg;
  cfg.sensors = 3;
  cfg.time_steps = 60;
  cfg.runs = 2;
  cfg.clusters = 2;
  cfg.window_size = 2;
  cfg.anomaly_count = 0;
  cfg.seed = 4;
  const SynthResult synth = generate(cfg);

  TiccParams params;
  params.num_clusters = 2;
  params.sparsity = 0.5;
  params.switch_penalty = 10.0;
  params.cross_run_penalty = 5.0;
  params.window_size = 2;
  params.run_window = 2;
  params.restarts = 1;
  params.seed = 77;

  const auto windows = stack_windows(synth.data, 2);
  const auto a = fit(windows, cfg.sensors, params);
  const auto b = fit(windows, cfg.sensors, params);
  REQUIRE(a.assignments.size() == b.assignments.size());
  for (std::size_t i = 0; i < a.assignments.size(); ++i)
    CHECK(a.assignments[i].cluster_id == b.assignments[i].cluster_id);
  CHECK(a.objective_trace == b.objective_trace);
}

TEST_CASE("fit objective trace is non-increasing and GTC vanishes for one run") {
  SynthConfig cfg;
  cfg.sensors = 3;
  cfg.time_steps = 80;
  cfg.runs = 1;
  cfg.clusters = 2;
  cfg.window_size = 2;
  cfg.anomaly_count = 0;
  cfg.seed = 15;
  const SynthResult synth = generate(cfg);

  TiccParams params;
  params.num_clusters = 2;
  params.sparsity = 0.3;
  params.switch_penalty = 5.0;
  params.window_size = 2;
  params.run_window = 1;

  const auto windows = stack_windows(synth.data, 2);

  params.cross_run_penalty = 0.0;
  const auto base = fit(windows, cfg.sensors, params);
  for (std::size_t i = 1; i < base.objective_trace.size(); ++i)
    CHECK(base.objective_trace[i] <= base.objective_trace[i - 1] + 1e-9);

  // With a single run the cross-run penalty can never fire.
  params.cross_run_penalty = 1e6;
  const auto huge_alpha = fit(windows, cfg.sensors, params);
  CHECK(huge_alpha.objective_trace == base.objective_trace);
}

TEST_CASE("raising the cross-run penalty never increases disagreements on copied runs") {
  Rng rng(55);
  NegLogLikTable table = random_table(1, 8, 3, rng);
  table.per_run.push_back(table.per_run.front());  // identical copy

  int prev_disagreements = 1 << 20;
  for (const Scalar alpha : {0.0, 0.2, 1.0, 5.0}) {
    const auto result = assign_clusters(table, penalties(0.8, alpha));
    std::map<Index, std::vector<int>> by_time;
    for (const auto& a : result.assignments)
      by_time[a.end_time].resize(2),
          by_time[a.end_time][static_cast<std::size_t>(a.run)] = a.cluster_id;
    int disagreements = 0;
    for (const auto& [t, ks] : by_time) disagreements += (ks[0] != ks[1]);
    CHECK(disagreements <= prev_disagreements);
    prev_disagreements = disagreements;
  }
}

TEST_CASE("fit rejects more clusters than windows") {
  SynthConfig cfg;
  cfg.sensors = 2;
  cfg.time_steps = 5;
  cfg.runs = 1;
  cfg.clusters = 1;
  cfg.window_size = 2;
  cfg.anomaly_count = 0;
  const SynthResult synth = generate(cfg);
  const auto windows = stack_windows(synth.data, 2);  // 4 windows

  TiccParams params;
  params.num_clusters = 5;
  params.window_size = 2;
  params.run_window = 1;
  CHECK_THROWS_AS(fit(windows, 2, params), ConfigError);
}

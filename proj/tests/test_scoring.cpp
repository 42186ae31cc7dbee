#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "causalrank/errors.hpp"
#include "causalrank/random.hpp"
#include "causalrank/scoring.hpp"
#include "support/oracles.hpp"

using namespace causalrank;

namespace {

// Random symmetric nonnegative adjacency with zero diagonal.
Matrix random_adjacency(Index n, Scalar density, Rng& rng) {
  Matrix a = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (rng.uniform() < density) {
        const Scalar w = rng.uniform(0.3, 1.0);
        a(i, j) = w;
        a(j, i) = w;
      }
  return a;
}

}  // namespace

TEST_CASE("normalize_adjacency hand examples") {
  SUBCASE("unit degrees leave the matrix unchanged") {
    Matrix a(2, 2);
    a << 0, 1, 1, 0;
    const auto norm = normalize_adjacency(a);
    CHECK((norm.a_tilde - a).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(norm.degree(0) == 1.0);
    CHECK(norm.degree(1) == 1.0);
  }
  SUBCASE("empty graph stays empty") {
    const auto norm = normalize_adjacency(Matrix::Zero(3, 3));
    CHECK(norm.a_tilde.cwiseAbs().maxCoeff() == 0.0);
    CHECK(norm.degree.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("weights normalize by sqrt of both degrees") {
    Matrix a(2, 2);
    a << 0, 2, 2, 0;
    const auto norm = normalize_adjacency(a);
    CHECK(norm.a_tilde(0, 1) == doctest::Approx(1.0));  // 2 / sqrt(2*2)
    CHECK(norm.degree(0) == 2.0);
  }
  SUBCASE("diagonal and sign are stripped") {
    Matrix a(2, 2);
    a << 5.0, -2.0, -2.0, 7.0;
    const auto norm = normalize_adjacency(a);
    CHECK(norm.a_tilde(0, 0) == 0.0);
    CHECK(norm.a_tilde(0, 1) == doctest::Approx(1.0));
  }
}

TEST_CASE("propagation_operator closed forms") {
  SUBCASE("no edges gives pure damping") {
    NormalizedAdjacency none{Matrix::Zero(3, 3), Vector::Zero(3)};
    const auto op = propagation_operator(none, 0.5);
    CHECK((op.e - 0.5 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("two-node exchange") {
    Matrix a(2, 2);
    a << 0, 1, 1, 0;
    const auto op = propagation_operator(NormalizedAdjacency{a, Vector::Ones(2)}, 0.5);
    Matrix expected(2, 2);
    expected << 2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0;
    CHECK((op.e - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("factor zero is the identity") {
    Matrix a(2, 2);
    a << 0, 1, 1, 0;
    const auto op = propagation_operator(NormalizedAdjacency{a, Vector::Ones(2)}, 0.0);
    CHECK((op.e - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("factor outside [0,1) is rejected") {
    NormalizedAdjacency none{Matrix::Zero(2, 2), Vector::Zero(2)};
    CHECK_THROWS_AS(propagation_operator(none, 1.0), ConfigError);
    CHECK_THROWS_AS(propagation_operator(none, -0.1), ConfigError);
  }
}

TEST_CASE("fault_propagate basics and quadratic-minimizer oracle") {
  Rng rng(31);
  SUBCASE("zero scores propagate to zero") {
    const auto op = propagation_operator(
        NormalizedAdjacency{random_adjacency(4, 0.8, rng), Vector::Zero(4)}, 0.7);
    CHECK(fault_propagate(op, Vector::Zero(4)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("no edges means no spread") {
    const auto op =
        propagation_operator(NormalizedAdjacency{Matrix::Zero(3, 3), Vector::Zero(3)}, 0.5);
    Vector s = Vector::Zero(3);
    s(0) = 1.0;
    const Vector b = fault_propagate(op, s);
    CHECK(b(0) == doctest::Approx(0.5));
    CHECK(b(1) == 0.0);
    CHECK(b(2) == 0.0);
  }
  SUBCASE("matches the projected-gradient minimizer") {
    for (int trial = 0; trial < 10; ++trial) {
      const Index n = 6;
      const Matrix raw = random_adjacency(n, 0.5, rng);
      const auto norm = normalize_adjacency(raw);
      const Scalar c = 0.6;
      const auto op = propagation_operator(norm, c);
      Vector s(n);
      for (Index i = 0; i < n; ++i) s(i) = rng.uniform();
      const Vector b = fault_propagate(op, s);
      const Vector oracle = testing::projected_gradient_propagation(norm.a_tilde, c, s);
      CHECK((b - oracle).cwiseAbs().maxCoeff() < 1e-6);
      CHECK(b.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("build_broken_network semantics") {
  Matrix gt(3, 3);
  gt << 1.0, 0.8, 0.0, 0.8, 1.0, -0.6, 0.0, -0.6, 1.0;

  SUBCASE("identical observation breaks nothing") {
    const auto pair = build_broken_network(gt, gt, 0.5, 1e-4);
    CHECK(pair.broken.cwiseAbs().maxCoeff() == 0.0);
    CHECK(pair.mask(0, 1) == 1.0);
    CHECK(pair.mask(0, 2) == 0.0);  // below the edge floor
    CHECK(pair.mask(0, 0) == 0.0);  // diagonal excluded
  }
  SUBCASE("zero observation breaks every masked edge") {
    const auto pair = build_broken_network(gt, Matrix::Zero(3, 3), 0.5, 1e-4);
    const Matrix normalized = normalize_adjacency(gt).a_tilde;
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j) {
        if (pair.mask(i, j) == 1.0)
          CHECK(pair.broken(i, j) == doctest::Approx(normalized(i, j)));
        else
          CHECK(pair.broken(i, j) == 0.0);
      }
  }
  SUBCASE("the vanish threshold is strict") {
    Matrix observed = gt;
    observed(0, 1) = 0.4;  // exactly half of 0.8
    observed(1, 0) = 0.4;
    const auto at_half = build_broken_network(gt, observed, 0.5, 1e-4);
    CHECK(at_half.broken(0, 1) == 0.0);
    const auto above = build_broken_network(gt, observed, 0.6, 1e-4);
    CHECK(above.broken(0, 1) > 0.0);
  }
  SUBCASE("broken is nonzero only on the mask and all parts are symmetric") {
    Rng rng(77);
    const Matrix obs = 0.3 * gt;
    const auto pair = build_broken_network(gt, obs, 0.5, 1e-4);
    CHECK((pair.mask - pair.mask.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((pair.broken - pair.broken.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j)
        if (pair.mask(i, j) == 0.0) CHECK(pair.broken(i, j) == 0.0);
  }
}

TEST_CASE("solve_window_scores: zero broken network drives scores to zero") {
  Rng rng(3);
  const Index n = 5;
  const Matrix adj = random_adjacency(n, 0.6, rng);
  const auto norm = normalize_adjacency(adj);
  const auto op = propagation_operator(norm, 0.9);
  BrokenNetworkPair pair;
  pair.ground_truth = adj;
  pair.mask = (adj.array() != 0.0).cast<Scalar>().matrix();
  pair.broken = Matrix::Zero(n, n);

  const auto result = solve_window_scores(op, pair, 0.1);
  CHECK(result.s.cwiseAbs().maxCoeff() == 0.0);
  CHECK(result.converged);
}

TEST_CASE("solve_window_scores: unit update ratio is a fixed point") {
  Rng rng(13);
  const Index n = 5;
  const Matrix adj = random_adjacency(n, 0.8, rng);
  const auto norm = normalize_adjacency(adj);
  const auto op = propagation_operator(norm, 0.8);

  // Build the broken network from the solver's own starting point, so the
  // first update ratio is exactly one.
  const Vector start = Vector::Constant(n, 0.5);
  const Vector u = op.e * start;
  BrokenNetworkPair pair;
  pair.ground_truth = adj;
  pair.mask = (adj.array() != 0.0).cast<Scalar>().matrix();
  pair.broken = (u * u.transpose()).cwiseProduct(pair.mask);

  const auto result = solve_window_scores(op, pair, 0.0);
  CHECK((result.s - start).cwiseAbs().maxCoeff() < 1e-9);
  REQUIRE(result.objective_trace.size() >= 2);
  CHECK(result.objective_trace[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("solve_window_scores recovers a planted support") {
  Rng rng(29);
  int successes = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 8;
    const Matrix adj = random_adjacency(n, 0.7, rng);
    const auto norm = normalize_adjacency(adj);
    const auto op = propagation_operator(norm, 0.8);

    Vector planted = Vector::Zero(n);
    planted(1) = 1.0;
    planted(6) = 1.0;
    const Vector u = op.e * planted;
    BrokenNetworkPair pair;
    pair.ground_truth = adj;
    pair.mask = (adj.array() != 0.0).cast<Scalar>().matrix();
    pair.broken = (u * u.transpose()).cwiseProduct(pair.mask);

    ScoreSolverOptions options;
    options.max_iters = 2000;
    const auto result = solve_window_scores(op, pair, 0.0, options);

    std::vector<std::pair<Scalar, Index>> order;
    for (Index i = 0; i < n; ++i) order.emplace_back(result.s(i), i);
    std::sort(order.rbegin(), order.rend());
    const bool hit = (order[0].second == 1 || order[0].second == 6) &&
                     (order[1].second == 1 || order[1].second == 6) &&
                     order[0].second != order[1].second;
    successes += hit;
  }
  CHECK(successes >= 4);
}

TEST_CASE("solve_window_scores objective is non-increasing and scores stay nonnegative") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 4 + static_cast<Index>(rng.uniform_int(0, 8));
    const Matrix adj = random_adjacency(n, 0.5, rng);
    const auto norm = normalize_adjacency(adj);
    const auto op = propagation_operator(norm, rng.uniform(0.1, 0.95));

    BrokenNetworkPair pair;
    pair.ground_truth = adj;
    pair.mask = (adj.array() != 0.0).cast<Scalar>().matrix();
    pair.broken = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (pair.mask(i, j) == 1.0 && rng.uniform() < 0.5) {
          const Scalar v = rng.uniform(0.0, 0.5);
          pair.broken(i, j) = v;
          pair.broken(j, i) = v;
        }

    const auto result = solve_window_scores(op, pair, rng.uniform(0.0, 0.2));
    CHECK(result.s.minCoeff() >= 0.0);
    for (std::size_t i = 1; i < result.objective_trace.size(); ++i)
      CHECK(result.objective_trace[i] <= result.objective_trace[i - 1] + 1e-9);
  }
}

TEST_CASE("aggregate_point_scores averaging") {
  SUBCASE("window size one is the identity") {
    std::map<Index, Vector> scores;
    for (Index t = 1; t <= 4; ++t) scores[t] = Vector::Constant(2, static_cast<Scalar>(t));
    const Matrix points = aggregate_point_scores(scores, 2, 1, 4);
    for (Index t = 0; t < 4; ++t) CHECK(points(0, t) == static_cast<Scalar>(t + 1));
  }
  SUBCASE("constant scores average to the constant") {
    std::map<Index, Vector> scores;
    for (Index t = 3; t <= 9; ++t) scores[t] = Vector::Constant(6, 2.5);
    const Matrix points = aggregate_point_scores(scores, 2, 3, 9);
    CHECK((points.array() - 2.5).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("hand-enumerated overlap for window 2, T=3") {
    std::map<Index, Vector> scores;
    Vector s2(2), s3(2);
    s2 << 1.0, 2.0;  // window ending at 2: t=1 entry 1.0, t=2 entry 2.0
    s3 << 5.0, 9.0;  // window ending at 3: t=2 entry 5.0, t=3 entry 9.0
    scores[2] = s2;
    scores[3] = s3;
    const Matrix points = aggregate_point_scores(scores, 1, 2, 3);
    CHECK(points(0, 0) == doctest::Approx(1.0));
    CHECK(points(0, 1) == doctest::Approx(3.5));  // mean of 2.0 and 5.0
    CHECK(points(0, 2) == doctest::Approx(9.0));
  }
}

TEST_CASE("rank_sensors ordering and ties") {
  SUBCASE("unique maximum ranks first") {
    Matrix points = Matrix::Zero(5, 10);
    points(3, 7) = 2.0;
    points(1, 2) = 1.0;
    const auto ranked = rank_sensors(points);
    CHECK(ranked[0].first == 3);
    CHECK(ranked[0].second == 2.0);
    CHECK(ranked[1].first == 1);
  }
  SUBCASE("all zeros falls back to index order") {
    const auto ranked = rank_sensors(Matrix::Zero(4, 3));
    for (Index i = 0; i < 4; ++i) CHECK(ranked[static_cast<std::size_t>(i)].first == i);
  }
  SUBCASE("equal maxima break toward the lower index") {
    Matrix points = Matrix::Zero(3, 2);
    points(2, 0) = 1.0;
    points(0, 1) = 1.0;
    const auto ranked = rank_sensors(points);
    CHECK(ranked[0].first == 0);
    CHECK(ranked[1].first == 2);
  }
}

TEST_CASE("permutation equivariance of the scoring path") {
  Rng rng(59);
  const Index n = 6;
  const Matrix adj = random_adjacency(n, 0.6, rng);
  Matrix observed = 0.2 * adj;

  // Score, then permute sensors and score again; results must permute.
  const auto score = [&](const Matrix& gt, const Matrix& obs) {
    const auto op = propagation_operator(normalize_adjacency(gt), 0.8);
    const auto pair = build_broken_network(gt, obs, 0.5, 1e-4);
    return solve_window_scores(op, pair, 0.01).s;
  };
  const Vector base = score(adj, observed);

  std::vector<Index> perm{3, 0, 5, 1, 4, 2};
  Matrix p = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) p(perm[static_cast<std::size_t>(i)], i) = 1.0;
  const Matrix gt_perm = p * adj * p.transpose();
  const Matrix obs_perm = p * observed * p.transpose();
  const Vector permuted = score(gt_perm, obs_perm);

  for (Index i = 0; i < n; ++i)
    CHECK(permuted(perm[static_cast<std::size_t>(i)]) ==
          doctest::Approx(base(i)).epsilon(1e-10));
}

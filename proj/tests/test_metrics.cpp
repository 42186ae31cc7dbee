#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "causalrank/errors.hpp"
#include "causalrank/metrics.hpp"
#include "causalrank/random.hpp"

using namespace causalrank;

TEST_CASE("precision and recall at k") {
  // ranked [a,c,b,d] with truth {a,b}: sensors a=0, c=1, b=2, d=3.
  const std::vector<Index> ranked{0, 1, 2, 3};
  const std::set<Index> truth{0, 2};

  SUBCASE("k=2 catches one of two") {
    const auto pr = precision_recall_at_k(ranked, truth, 2);
    CHECK(pr.precision == doctest::Approx(0.5));
    CHECK(pr.recall == doctest::Approx(0.5));
  }
  SUBCASE("perfect ranking at k = |truth|") {
    const std::vector<Index> perfect{0, 2, 1, 3};
    const auto pr = precision_recall_at_k(perfect, truth, 2);
    CHECK(pr.precision == doctest::Approx(1.0));
    CHECK(pr.recall == doctest::Approx(1.0));
  }
  SUBCASE("disjoint top-k scores zero") {
    const std::vector<Index> bad{1, 3, 0, 2};
    const auto pr = precision_recall_at_k(bad, truth, 2);
    CHECK(pr.precision == 0.0);
    CHECK(pr.recall == 0.0);
  }
  SUBCASE("k beyond the list keeps k in the denominator") {
    const auto pr = precision_recall_at_k(ranked, truth, 8);
    CHECK(pr.precision == doctest::Approx(2.0 / 8.0));
    CHECK(pr.recall == doctest::Approx(1.0));
  }
}

TEST_CASE("ndcg at p") {
  // ranked [a,c,b] with truth {a,b}: a=0, c=1, b=2.
  const std::vector<Index> ranked{0, 1, 2};
  const std::set<Index> truth{0, 2};

  SUBCASE("hand-computed value at p=2") {
    // DCG = 1/log2(2) = 1; IDCG = 1 + 1/log2(3).
    const Scalar expected = 1.0 / (1.0 + 1.0 / std::log2(3.0));
    CHECK(ndcg_at_p(ranked, truth, 2) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(ndcg_at_p(ranked, truth, 2) == doctest::Approx(0.6131471927654584).epsilon(1e-9));
  }
  SUBCASE("ideal ranking scores one") {
    const std::vector<Index> ideal{0, 2, 1};
    CHECK(ndcg_at_p(ideal, truth, 2) == doctest::Approx(1.0));
    CHECK(ndcg_at_p(ideal, truth, 1) == doctest::Approx(1.0));
  }
  SUBCASE("no relevant item in top-p scores zero") {
    const std::vector<Index> bad{1, 0, 2};
    CHECK(ndcg_at_p(bad, truth, 1) == 0.0);
  }
}

TEST_CASE("metrics reject degenerate arguments") {
  const std::vector<Index> ranked{0, 1};
  CHECK_THROWS_AS(precision_recall_at_k(ranked, {}, 1), ConfigError);
  CHECK_THROWS_AS(precision_recall_at_k(ranked, {0}, 0), ConfigError);
  CHECK_THROWS_AS(ndcg_at_p(ranked, {}, 1), ConfigError);
  CHECK_THROWS_AS(ndcg_at_p(ranked, {0}, 0), ConfigError);
}

TEST_CASE("metrics are invariant under consistent sensor relabeling") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 8;
    std::vector<Index> ranked(n);
    for (Index i = 0; i < n; ++i) ranked[static_cast<std::size_t>(i)] = i;
    for (Index i = n - 1; i > 0; --i)
      std::swap(ranked[static_cast<std::size_t>(i)],
                ranked[static_cast<std::size_t>(rng.uniform_int(0, i))]);
    const std::set<Index> truth{ranked[1], ranked[4], ranked[6]};

    // Relabel sensors by a random permutation.
    std::vector<Index> perm(n);
    for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (Index i = n - 1; i > 0; --i)
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[static_cast<std::size_t>(rng.uniform_int(0, i))]);
    std::vector<Index> relabeled;
    for (const Index s : ranked) relabeled.push_back(perm[static_cast<std::size_t>(s)]);
    std::set<Index> truth_relabeled;
    for (const Index s : truth) truth_relabeled.insert(perm[static_cast<std::size_t>(s)]);

    const auto pr = precision_recall_at_k(ranked, truth, 4);
    const auto pr2 = precision_recall_at_k(relabeled, truth_relabeled, 4);
    CHECK(pr.precision == pr2.precision);
    CHECK(pr.recall == pr2.recall);
    CHECK(ndcg_at_p(ranked, truth, 2) == ndcg_at_p(relabeled, truth_relabeled, 2));
  }
}

TEST_CASE("cutoff defaults derive from the truth size") {
  EvalParams defaults;
  CHECK(resolve_top_k(defaults, 3) == 6);
  CHECK(resolve_ndcg_p(defaults, 3) == 2);
  CHECK(resolve_ndcg_p(defaults, 1) == 1);
  EvalParams fixed{.top_k = 5, .ndcg_p = 4};
  CHECK(resolve_top_k(fixed, 3) == 5);
  CHECK(resolve_ndcg_p(fixed, 3) == 4);
}

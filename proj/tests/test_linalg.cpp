#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "causalrank/linalg.hpp"
#include "causalrank/random.hpp"

using namespace causalrank;

namespace {

Matrix random_symmetric(Index n, Rng& rng) {
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) {
      m(i, j) = rng.normal();
      m(j, i) = m(i, j);
    }
  return m;
}

}  // namespace

TEST_CASE("block_toeplitz_project averages sub-blocks along each diagonal") {
  // Two 1x1 blocks per side: plain 2x2 Toeplitz projection.
  Matrix m(2, 2);
  m << 1.0, 4.0, 2.0, 9.0;
  const Matrix p = block_toeplitz_project(m, 1);
  CHECK(p(0, 0) == doctest::Approx(5.0));   // (1+9)/2
  CHECK(p(1, 1) == doctest::Approx(5.0));
  CHECK(p(0, 1) == doctest::Approx(3.0));   // (4+2)/2, symmetrized
  CHECK(p(1, 0) == doctest::Approx(3.0));
}

TEST_CASE("block_toeplitz_project is an idempotent symmetric projection") {
  Rng rng(3);
  for (const Index block : {1, 2, 3}) {
    const Index n = block * 3;
    const Matrix m = random_symmetric(n, rng);
    const Matrix once = block_toeplitz_project(m, block);
    CHECK(is_symmetric(once, 1e-12));
    CHECK(is_block_toeplitz(once, block, 1e-12));
    const Matrix twice = block_toeplitz_project(once, block);
    CHECK((once - twice).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("ensure_min_eigenvalue lifts the spectrum to the floor") {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;  // eigenvalues -1, 1
  const Matrix fixed = ensure_min_eigenvalue(m, 0.1);
  CHECK(min_eigenvalue(fixed) == doctest::Approx(0.1));
  // Already-PD input is untouched.
  const Matrix same = ensure_min_eigenvalue(Matrix::Identity(3, 3), 0.5);
  CHECK((same - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("abs_cosine_distance conventions") {
  Matrix a(2, 2), b(2, 2), zero = Matrix::Zero(2, 2);
  a << 1, 2, 3, 4;
  b << -1, -2, -3, -4;  // same absolute entries

  CHECK(abs_cosine_distance(a, a) == doctest::Approx(0.0));
  CHECK(abs_cosine_distance(a, b) == doctest::Approx(0.0));  // sign-blind
  CHECK(abs_cosine_distance(a, 2.0 * a) == doctest::Approx(0.0));
  CHECK(abs_cosine_distance(zero, zero) == 0.0);
  CHECK(abs_cosine_distance(zero, a) == 1.0);
  CHECK(abs_cosine_distance(a, zero) == 1.0);

  Matrix c(2, 2), d(2, 2);
  c << 1, 0, 0, 0;
  d << 0, 2, 0, 0;  // disjoint supports
  CHECK(abs_cosine_distance(c, d) == doctest::Approx(1.0));
}

TEST_CASE("abs_cosine_distance stays in [0,1] on random inputs") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = random_symmetric(4, rng);
    const Matrix b = random_symmetric(4, rng);
    const Scalar d = abs_cosine_distance(a, b);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(abs_cosine_distance(b, a) == d);
  }
}

TEST_CASE("soft_threshold") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(soft_threshold(0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
}

#pragma once

#include "causalrank/types.hpp"

namespace causalrank {

// Helpers for symmetric block-structured matrices. A matrix of size
// (B*block_dim) x (B*block_dim) is treated as a B x B grid of
// block_dim x block_dim sub-blocks; block-Toeplitz means sub-block (i, j)
// depends only on j - i.

// Orthogonal projection onto the subspace of symmetric block-Toeplitz
// matrices: averages sub-blocks along each block diagonal and symmetrizes.
Matrix block_toeplitz_project(const Matrix& m, Index block_dim);

// Max deviation between sub-blocks that the block-Toeplitz structure
// requires to be equal.
Scalar block_toeplitz_deviation(const Matrix& m, Index block_dim);

bool is_block_toeplitz(const Matrix& m, Index block_dim, Scalar tol);

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m, Scalar tol) {
  const Matrix d = m.derived() - m.derived().transpose();
  return d.template lpNorm<Eigen::Infinity>() <= tol;
}

Scalar min_eigenvalue(const Matrix& symmetric);

// Shifts the diagonal so the smallest eigenvalue is at least `floor`.
Matrix ensure_min_eigenvalue(Matrix m, Scalar floor);

// Cosine distance between the entrywise absolute values of a and b,
// flattened to vectors. Zero conventions: two zero matrices have distance
// 0, a zero matrix against a nonzero one has distance 1. Result is
// clamped to [0, 1].
Scalar abs_cosine_distance(const Matrix& a, const Matrix& b);

inline Scalar soft_threshold(Scalar x, Scalar t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace causalrank

#include "causalrank/linalg.hpp"

#include <algorithm>

#include "causalrank/errors.hpp"

namespace causalrank {

namespace {

Index block_count(const Matrix& m, Index block_dim) {
  if (m.rows() != m.cols()) throw Error("block matrix must be square");
  if (block_dim <= 0 || m.rows() % block_dim != 0)
    throw Error("matrix size is not a multiple of the block dimension");
  return m.rows() / block_dim;
}

}  // namespace

Matrix block_toeplitz_project(const Matrix& m, Index block_dim) {
  const Index blocks = block_count(m, block_dim);
  Matrix out(m.rows(), m.cols());
  for (Index lag = 0; lag < blocks; ++lag) {
    // Combine the upper (i, i+lag) and lower (i+lag, i) diagonals so the
    // result is symmetric as well as block-Toeplitz.
    Matrix upper = Matrix::Zero(block_dim, block_dim);
    Matrix lower = Matrix::Zero(block_dim, block_dim);
    for (Index i = 0; i + lag < blocks; ++i) {
      upper += m.block(i * block_dim, (i + lag) * block_dim, block_dim, block_dim);
      lower += m.block((i + lag) * block_dim, i * block_dim, block_dim, block_dim);
    }
    const Scalar count = static_cast<Scalar>(blocks - lag);
    const Matrix c = (upper + lower.transpose()) / (2.0 * count);
    for (Index i = 0; i + lag < blocks; ++i) {
      out.block(i * block_dim, (i + lag) * block_dim, block_dim, block_dim) = c;
      out.block((i + lag) * block_dim, i * block_dim, block_dim, block_dim) = c.transpose();
    }
  }
  return out;
}

Scalar block_toeplitz_deviation(const Matrix& m, Index block_dim) {
  const Index blocks = block_count(m, block_dim);
  Scalar dev = 0.0;
  for (Index i = 0; i + 1 < blocks; ++i) {
    for (Index j = 0; j + 1 < blocks; ++j) {
      const Matrix d =
          m.block(i * block_dim, j * block_dim, block_dim, block_dim) -
          m.block((i + 1) * block_dim, (j + 1) * block_dim, block_dim, block_dim);
      dev = std::max(dev, d.lpNorm<Eigen::Infinity>());
    }
  }
  return dev;
}

bool is_block_toeplitz(const Matrix& m, Index block_dim, Scalar tol) {
  return block_toeplitz_deviation(m, block_dim) <= tol;
}

Scalar min_eigenvalue(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Matrix ensure_min_eigenvalue(Matrix m, Scalar floor) {
  const Scalar lo = min_eigenvalue(m);
  if (lo < floor) m.diagonal().array() += floor - lo;
  return m;
}

Scalar abs_cosine_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error("cosine distance requires equal shapes");
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == 0.0 && nb == 0.0) return 0.0;
  if (na == 0.0 || nb == 0.0) return 1.0;
  const Scalar dot = (a.array().abs() * b.array().abs()).sum();
  const Scalar d = 1.0 - dot / (na * nb);
  return std::clamp(d, 0.0, 1.0);
}

}  // namespace causalrank

#include "causalrank/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "causalrank/errors.hpp"

namespace causalrank {

NormalizedAdjacency normalize_adjacency(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error("normalize_adjacency: matrix must be square");
  const Index n = a.rows();
  Matrix w = a.cwiseAbs();
  w.diagonal().setZero();

  NormalizedAdjacency out;
  out.degree = w.rowwise().sum();
  Vector inv_sqrt(n);
  for (Index i = 0; i < n; ++i)
    inv_sqrt(i) = out.degree(i) > 0.0 ? 1.0 / std::sqrt(out.degree(i)) : 0.0;
  // Fill one triangle and mirror so the result is exactly symmetric.
  out.a_tilde = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const Scalar v = inv_sqrt(i) * w(i, j) * inv_sqrt(j);
      out.a_tilde(i, j) = v;
      out.a_tilde(j, i) = v;
    }
  return out;
}

PropagationOperator propagation_operator(const NormalizedAdjacency& adjacency,
                                         Scalar factor) {
  if (factor < 0.0 || factor >= 1.0)
    throw ConfigError("propagation factor must lie in [0, 1)");
  const Index n = adjacency.a_tilde.rows();
  const Matrix system = Matrix::Identity(n, n) - factor * adjacency.a_tilde;
  Eigen::PartialPivLU<Matrix> lu(system);
  PropagationOperator op;
  op.factor = factor;
  op.e = (1.0 - factor) * lu.solve(Matrix::Identity(n, n));
  // I - c*a_tilde is strictly diagonally dominant in the scaled metric for
  // c < 1 (spectral radius of a_tilde is at most 1), so the solve is sound;
  // verify anyway.
  if (!op.e.allFinite()) throw Error("propagation operator solve failed");
  return op;
}

Vector fault_propagate(const PropagationOperator& op, const Vector& s) {
  if (s.size() != op.e.rows()) throw Error("fault_propagate: dimension mismatch");
  return op.e * s;
}

BrokenNetworkPair build_broken_network(const Matrix& ground_truth,
                                       const Matrix& observed, Scalar vanish_ratio,
                                       Scalar edge_floor) {
  if (ground_truth.rows() != observed.rows() || ground_truth.cols() != observed.cols())
    throw Error("build_broken_network: shape mismatch");
  const Index n = ground_truth.rows();

  BrokenNetworkPair pair;
  pair.ground_truth = ground_truth;
  pair.mask = Matrix::Zero(n, n);
  pair.broken = Matrix::Zero(n, n);

  const Matrix normalized = normalize_adjacency(ground_truth).a_tilde;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const Scalar gt = std::abs(ground_truth(i, j));
      if (gt <= edge_floor) continue;
      pair.mask(i, j) = 1.0;
      if (std::abs(observed(i, j)) < vanish_ratio * gt)
        pair.broken(i, j) = normalized(i, j);
    }
  }
  return pair;
}

namespace {

Scalar reconstruction_objective(const Matrix& e, const Vector& s, const Matrix& mask,
                                const Matrix& broken, Scalar l1_weight) {
  const Vector u = e * s;
  const Matrix fitted = (u * u.transpose()).cwiseProduct(mask);
  return (fitted - broken).squaredNorm() + l1_weight * s.sum();
}

}  // namespace

WindowScores solve_window_scores(const PropagationOperator& op,
                                 const BrokenNetworkPair& pair, Scalar l1_weight,
                                 const ScoreSolverOptions& options) {
  if (l1_weight < 0.0) throw ConfigError("l1_weight must be nonnegative");
  const Index n = op.e.rows();
  if (pair.broken.rows() != n || pair.mask.rows() != n)
    throw Error("solve_window_scores: dimension mismatch");

  WindowScores out;
  out.s = Vector::Constant(n, options.init_value);
  out.converged = false;

  Scalar prev = reconstruction_objective(op.e, out.s, pair.mask, pair.broken, l1_weight);
  if (options.record_trace) out.objective_trace.push_back(prev);

  for (int iter = 0; iter < options.max_iters; ++iter) {
    const Vector u = op.e * out.s;
    const Vector numer = 4.0 * (op.e.transpose() * (pair.broken * u));
    const Matrix fitted = (u * u.transpose()).cwiseProduct(pair.mask);
    Vector denom = 4.0 * (op.e.transpose() * (fitted * u));
    denom.array() += l1_weight;

    for (Index i = 0; i < n; ++i) {
      const Scalar ratio =
          std::max(numer(i), 0.0) / std::max(denom(i), options.denom_floor);
      out.s(i) *= std::pow(ratio, 0.25);
    }

    const Scalar obj =
        reconstruction_objective(op.e, out.s, pair.mask, pair.broken, l1_weight);
    if (options.record_trace) out.objective_trace.push_back(obj);
    if (std::abs(prev - obj) <= options.tol * std::max(Scalar(1.0), std::abs(prev))) {
      out.converged = true;
      break;
    }
    prev = obj;
  }
  return out;
}

Matrix aggregate_point_scores(const std::map<Index, Vector>& window_scores,
                              Index sensor_count, Index window_size,
                              Index total_time) {
  Matrix sum = Matrix::Zero(sensor_count, total_time);
  Matrix count = Matrix::Zero(sensor_count, total_time);
  for (const auto& [end_time, s] : window_scores) {
    if (s.size() != sensor_count * window_size)
      throw Error("aggregate_point_scores: window score has wrong length");
    for (Index j = 0; j < window_size; ++j) {
      const Index t = end_time - (window_size - 1) + j;  // 1-based timestamp
      if (t < 1 || t > total_time)
        throw Error("aggregate_point_scores: window extends outside 1..T");
      sum.col(t - 1) += s.segment(j * sensor_count, sensor_count);
      count.col(t - 1).array() += 1.0;
    }
  }
  Matrix out = Matrix::Zero(sensor_count, total_time);
  for (Index t = 0; t < total_time; ++t)
    if (count(0, t) > 0.0) out.col(t) = sum.col(t).cwiseQuotient(count.col(t));
  return out;
}

std::vector<std::pair<Index, Scalar>> rank_sensors(const Matrix& point_scores) {
  std::vector<std::pair<Index, Scalar>> ranked;
  ranked.reserve(static_cast<std::size_t>(point_scores.rows()));
  for (Index n = 0; n < point_scores.rows(); ++n)
    ranked.emplace_back(n, point_scores.row(n).maxCoeff());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  return ranked;
}

}  // namespace causalrank

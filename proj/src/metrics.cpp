#include "causalrank/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "causalrank/errors.hpp"

namespace causalrank {

PrecisionRecall precision_recall_at_k(const std::vector<Index>& ranked,
                                      const std::set<Index>& truth, int k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (truth.empty()) throw ConfigError("truth set must be non-empty");

  const auto top = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
  int hits = 0;
  for (std::size_t i = 0; i < top; ++i)
    if (truth.count(ranked[i])) ++hits;

  PrecisionRecall out;
  out.precision = static_cast<Scalar>(hits) / static_cast<Scalar>(k);
  out.recall = static_cast<Scalar>(hits) / static_cast<Scalar>(truth.size());
  return out;
}

Scalar ndcg_at_p(const std::vector<Index>& ranked, const std::set<Index>& truth,
                 int p) {
  if (p < 1) throw ConfigError("p must be >= 1");
  if (truth.empty()) throw ConfigError("truth set must be non-empty");

  const auto top = std::min<std::size_t>(static_cast<std::size_t>(p), ranked.size());
  Scalar dcg = 0.0;
  for (std::size_t i = 0; i < top; ++i)
    if (truth.count(ranked[i]))
      dcg += 1.0 / std::log2(static_cast<Scalar>(i) + 2.0);

  const auto ideal = std::min<std::size_t>(static_cast<std::size_t>(p), truth.size());
  Scalar idcg = 0.0;
  for (std::size_t i = 0; i < ideal; ++i)
    idcg += 1.0 / std::log2(static_cast<Scalar>(i) + 2.0);

  return dcg / idcg;
}

int resolve_top_k(const EvalParams& params, std::size_t truth_size) {
  if (params.top_k > 0) return params.top_k;
  return std::max<int>(1, 2 * static_cast<int>(truth_size));
}

int resolve_ndcg_p(const EvalParams& params, std::size_t truth_size) {
  if (params.ndcg_p > 0) return params.ndcg_p;
  return std::max<int>(1, static_cast<int>(truth_size) - 1);
}

}  // namespace causalrank

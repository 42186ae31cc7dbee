#pragma once

#include <set>
#include <vector>

#include "causalrank/types.hpp"

namespace causalrank {

struct PrecisionRecall {
  Scalar precision = 0.0;
  Scalar recall = 0.0;
};

// Binary-relevance precision/recall over the top-k of `ranked`. When k
// exceeds the list length the whole list is scored but k stays in the
// precision denominator.
PrecisionRecall precision_recall_at_k(const std::vector<Index>& ranked,
                                      const std::set<Index>& truth, int k);

// Binary-relevance nDCG over the top-p, discount log2(i+1), normalized by
// the ideal DCG at p.
Scalar ndcg_at_p(const std::vector<Index>& ranked, const std::set<Index>& truth,
                 int p);

// Ranking cutoffs; -1 derives them from the truth size: k = 2m and
// p = max(1, m-1).
struct EvalParams {
  int top_k = -1;
  int ndcg_p = -1;
};

int resolve_top_k(const EvalParams& params, std::size_t truth_size);
int resolve_ndcg_p(const EvalParams& params, std::size_t truth_size);

}  // namespace causalrank

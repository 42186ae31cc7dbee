#pragma once

#include <functional>

#include "causalrank/types.hpp"

namespace causalrank {

// Runs fn(i) for every i in [0, n) across up to `threads` workers
// (0 = hardware concurrency). Work items must write only to their own
// slots so results are independent of scheduling.
void parallel_for(Index n, int threads, const std::function<void(Index)>& fn);

}  // namespace causalrank

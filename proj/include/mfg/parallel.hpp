#pragma once

#include <functional>

namespace mfg {

/// Runs fn(i) for i in [0, count). With threads > 1 the range is split across
/// workers; every fn(i) must write only to its own output slot, which keeps
/// results identical for any worker count.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace mfg

#pragma once

#include <functional>

namespace rabi {

// Runs f(i) for every i in [0, count) on up to `jobs` threads (jobs <= 0: all
// hardware threads). f must only write to slot i, which keeps results
// independent of scheduling.
void parallel_for(int count, int jobs, const std::function<void(int)>& f);

} // namespace rabi

#pragma once

#include <functional>

#include "copoly/core.hpp"

namespace copoly {

/// Caps the worker count used by replica loops; 0 restores the hardware default.
void set_thread_limit(unsigned threads);
unsigned thread_limit();

/// Calls fn(i) for i in [0, count). Each index runs exactly once; callers write
/// to slot i and reduce afterwards in index order, which keeps results
/// independent of scheduling.
void parallel_for(Index count, const std::function<void(Index)>& fn);

}  // namespace copoly

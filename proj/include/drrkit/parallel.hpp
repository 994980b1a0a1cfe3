#pragma once

#include <cstddef>
#include <functional>

namespace drrkit {

/// Worker count used by parallel_for. Defaults to 1; 0 selects
/// std::thread::hardware_concurrency().
void set_thread_count(unsigned count);
unsigned thread_count();

/// Calls fn(i) for every i in [begin, end), split into contiguous chunks
/// across the configured workers. Callers write only to outputs owned by
/// index i, so results never depend on the worker count.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& fn);

}  // namespace drrkit

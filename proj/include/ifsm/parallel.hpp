#pragma once

#include <cstddef>
#include <functional>

namespace ifsm {

// Worker count: hardware concurrency capped by the IFSM_THREADS env var.
std::size_t thread_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunks write to
// disjoint output slots; callers reduce serially afterwards, so results do
// not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 4096);

}  // namespace ifsm
